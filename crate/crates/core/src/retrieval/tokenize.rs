/// Lowercases and splits on every non-alphanumeric character. No stemming,
/// no stopword removal.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_and_lowercases() {
        assert_eq!(
            tokenize("Christopher Nolan's film, Interstellar (2014)!"),
            ["christopher", "nolan", "s", "film", "interstellar", "2014"]
        );
        assert!(tokenize(" -- ").is_empty());
        assert_eq!(tokenize("Zürich-Straße"), ["zürich", "straße"]);
    }
}
