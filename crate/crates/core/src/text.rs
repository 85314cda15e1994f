//! Shared tokenization helpers.

/// Lowercased alphanumeric runs of `s`. Everything else (whitespace,
/// punctuation, symbols) separates tokens.
pub fn tokens(s: &str) -> impl Iterator<Item = String> + '_ {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Estimated token count of a text: one token per four characters, rounded up.
pub fn estimate_tokens(chars: usize) -> usize {
    chars.div_ceil(4)
}
