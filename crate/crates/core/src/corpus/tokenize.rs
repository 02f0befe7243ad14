/// Punctuation characters split off into tokens of their own.
pub const DEFAULT_PUNCTUATION: &[char] = &[',', '.', '!', '?', ';', ':', '(', ')', '"', '\''];

/// Whitespace tokenizer that detaches punctuation into separate tokens.
#[derive(Clone, Debug)]
pub struct Tokenizer {
    pub lowercase: bool,
    pub punctuation: Vec<char>,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer {
            lowercase: true,
            punctuation: DEFAULT_PUNCTUATION.to_vec(),
        }
    }
}

impl Tokenizer {
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let mut tokens = Vec::new();
        for chunk in text.split_whitespace() {
            let mut word = String::new();
            for ch in chunk.chars() {
                if self.punctuation.contains(&ch) {
                    if !word.is_empty() {
                        tokens.push(std::mem::take(&mut word));
                    }
                    tokens.push(ch.to_string());
                } else if self.lowercase {
                    word.extend(ch.to_lowercase());
                } else {
                    word.push(ch);
                }
            }
            if !word.is_empty() {
                tokens.push(word);
            }
        }
        tokens
    }
}

/// Tokenizes with the default rules (lowercasing, default punctuation set).
pub fn tokenize(text: &str) -> Vec<String> {
    Tokenizer::default().tokenize(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn punctuation_is_a_word() {
        assert_eq!(tokenize("The cat sat."), ["the", "cat", "sat", "."]);
        assert_eq!(
            tokenize("Wow!? (really)"),
            ["wow", "!", "?", "(", "really", ")"]
        );
    }

    #[test]
    fn empty_and_whitespace() {
        assert!(tokenize("").is_empty());
        assert!(tokenize(" \t\n").is_empty());
        assert_eq!(tokenize("a  b\tc"), ["a", "b", "c"]);
    }

    #[test]
    fn lowercasing_can_be_disabled() {
        let t = Tokenizer {
            lowercase: false,
            ..Tokenizer::default()
        };
        assert_eq!(t.tokenize("Hello, World"), ["Hello", ",", "World"]);
    }

    proptest! {
        #[test]
        fn idempotent_on_joined_output(text in "[a-zA-Z,.!?;:()'\" \t]{0,60}") {
            let once = tokenize(&text);
            let twice = tokenize(&once.join(" "));
            prop_assert_eq!(&once, &twice);
            for tok in &once {
                prop_assert!(!tok.is_empty());
                prop_assert!(!tok.chars().any(char::is_whitespace));
            }
        }
    }
}
