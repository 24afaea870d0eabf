//! Surface syntax of an action, e.g. `take ?o from ?r` or `put ?o in/on ?r`.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SyntaxToken {
    /// A literal word. `in/on` is stored as one word with two alternatives.
    Word { text: String, alternatives: Vec<String> },
    /// A parameter variable such as `?o`.
    Slot(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSyntax {
    tokens: Vec<SyntaxToken>,
}

impl ActionSyntax {
    /// Parses a syntax template. Variables are lower-cased; words keep their case
    /// for rendering and match case-insensitively.
    pub fn parse(template: &str) -> Result<Self, String> {
        let mut tokens = Vec::new();
        for piece in template.split_whitespace() {
            if let Some(var) = piece.strip_prefix('?') {
                if var.is_empty() {
                    return Err("empty variable name".into());
                }
                tokens.push(SyntaxToken::Slot(piece.to_ascii_lowercase()));
            } else {
                let alternatives = piece
                    .split('/')
                    .filter(|s| !s.is_empty())
                    .map(str::to_ascii_lowercase)
                    .collect::<Vec<_>>();
                if alternatives.is_empty() {
                    return Err(format!("bad word `{piece}`"));
                }
                tokens.push(SyntaxToken::Word { text: piece.to_string(), alternatives });
            }
        }
        match tokens.first() {
            Some(SyntaxToken::Word { .. }) => Ok(Self { tokens }),
            Some(SyntaxToken::Slot(_)) => Err("syntax must start with a word".into()),
            None => Err("syntax is empty".into()),
        }
    }

    /// Default syntax: the action name followed by every parameter.
    pub fn from_params<'a>(name: &str, params: impl IntoIterator<Item = &'a str>) -> Self {
        let mut tokens = vec![SyntaxToken::Word { text: name.to_string(), alternatives: vec![name.to_string()] }];
        tokens.extend(params.into_iter().map(|p| SyntaxToken::Slot(p.to_string())));
        Self { tokens }
    }

    pub fn tokens(&self) -> &[SyntaxToken] {
        &self.tokens
    }

    pub fn slots(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().filter_map(|t| match t {
            SyntaxToken::Slot(v) => Some(v.as_str()),
            SyntaxToken::Word { .. } => None,
        })
    }

    pub fn slot_count(&self) -> usize {
        self.slots().count()
    }

    /// Template with slots shown as `{name}`, for prompts.
    pub fn template(&self) -> String {
        self.tokens
            .iter()
            .map(|t| match t {
                SyntaxToken::Word { text, .. } => text.clone(),
                SyntaxToken::Slot(v) => format!("{{{}}}", &v[1..]),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Fills slots in order with `arguments`. Missing arguments render as `?`;
    /// a word with alternatives renders as its first one.
    pub fn render(&self, arguments: &[String]) -> String {
        let mut args = arguments.iter();
        self.tokens
            .iter()
            .map(|t| match t {
                SyntaxToken::Word { text, alternatives } if text.contains('/') => alternatives[0].clone(),
                SyntaxToken::Word { text, .. } => text.clone(),
                SyntaxToken::Slot(_) => args.next().cloned().unwrap_or_else(|| "?".into()),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Matches whitespace-separated `text`; returns slot values (lower-cased)
    /// in syntax order.
    pub fn matches(&self, text: &str) -> Option<Vec<String>> {
        let words: Vec<&str> = text.split_whitespace().collect();
        if words.len() != self.tokens.len() {
            return None;
        }
        let mut out = Vec::new();
        for (tok, word) in self.tokens.iter().zip(words) {
            let word = word.to_ascii_lowercase();
            match tok {
                SyntaxToken::Word { text, alternatives } => {
                    if !alternatives.contains(&word) && word != text.to_ascii_lowercase() {
                        return None;
                    }
                }
                SyntaxToken::Slot(_) => out.push(word),
            }
        }
        Some(out)
    }
}

impl fmt::Display for ActionSyntax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .tokens
            .iter()
            .map(|t| match t {
                SyntaxToken::Word { text, .. } => text.clone(),
                SyntaxToken::Slot(v) => v.clone(),
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternatives_and_case() {
        let s = ActionSyntax::parse("put ?o in/on ?r").unwrap();
        assert_eq!(s.matches("put apple-1 in fridge-1"), Some(vec!["apple-1".into(), "fridge-1".into()]));
        assert_eq!(s.matches("Put Apple-1 on Table-1"), Some(vec!["apple-1".into(), "table-1".into()]));
        assert_eq!(s.matches("put apple-1 in/on fridge-1"), Some(vec!["apple-1".into(), "fridge-1".into()]));
        assert_eq!(s.matches("put apple-1 under fridge-1"), None);
        assert_eq!(s.render(&["a".into(), "b".into()]), "put a in b");
    }

    #[test]
    fn camel_case_word() {
        let s = ActionSyntax::parse("MoveToObject ?to").unwrap();
        assert_eq!(s.matches("movetoobject fridge-1"), Some(vec!["fridge-1".into()]));
        assert_eq!(s.template(), "MoveToObject {to}");
        assert_eq!(s.render(&["fridge-1".into()]), "MoveToObject fridge-1");
    }

    #[test]
    fn rejects_bad_templates() {
        assert!(ActionSyntax::parse("").is_err());
        assert!(ActionSyntax::parse("?x go").is_err());
    }
}
