//! Token classes of the query language.
//!
//! Labels are sequences of whitespace-separated tokens. Beyond the fixed
//! keywords contributed by the registry (operation names, integer-slot
//! keywords, enum values), two open token classes exist: decimal integers
//! and free identifiers. The connectors `and` / `or` are reserved and never
//! valid as free identifiers.

/// Tokens that join clauses and are excluded from the free identifier class.
pub const RESERVED: [&str; 2] = ["and", "or"];

/// `0`, or a digit sequence without a leading zero, at most nine digits.
///
/// Nine digits keep every value well inside `u32`, so downstream code can
/// parse bound values without overflow checks.
pub fn is_int_token(tok: &str) -> bool {
    let len = tok.len();
    if len == 0 || len > 9 || !tok.bytes().all(|b| b.is_ascii_digit()) {
        return false;
    }
    len == 1 || !tok.starts_with('0')
}

/// `[a-z_][a-z0-9_]*`, excluding the reserved connectors.
pub fn is_free_token(tok: &str) -> bool {
    let mut bytes = tok.bytes();
    let Some(first) = bytes.next() else {
        return false;
    };
    if !(first.is_ascii_lowercase() || first == b'_') {
        return false;
    }
    if !bytes.all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_') {
        return false;
    }
    !RESERVED.contains(&tok)
}
