use std::fmt;

use super::LanguageError;

/// Constituency parse tree. Terminal nodes carry a preterminal tag and a
/// token; phrase nodes carry a label and at least one child.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ParseTree {
    Terminal { tag: String, token: String },
    Phrase { label: String, children: Vec<ParseTree> },
}

impl ParseTree {
    pub fn terminal(tag: &str, token: &str) -> Self {
        ParseTree::Terminal {
            tag: tag.to_string(),
            token: token.to_string(),
        }
    }

    pub fn phrase(label: &str, children: Vec<ParseTree>) -> Self {
        ParseTree::Phrase {
            label: label.to_string(),
            children,
        }
    }

    pub fn label(&self) -> &str {
        match self {
            ParseTree::Terminal { tag, .. } => tag,
            ParseTree::Phrase { label, .. } => label,
        }
    }

    pub fn children(&self) -> &[ParseTree] {
        match self {
            ParseTree::Terminal { .. } => &[],
            ParseTree::Phrase { children, .. } => children,
        }
    }

    pub fn token(&self) -> Option<&str> {
        match self {
            ParseTree::Terminal { token, .. } => Some(token),
            ParseTree::Phrase { .. } => None,
        }
    }

    /// Leaves left to right as (tag, token).
    pub fn leaves(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<(&'a str, &'a str)>) {
        match self {
            ParseTree::Terminal { tag, token } => out.push((tag, token)),
            ParseTree::Phrase { children, .. } => {
                for c in children {
                    c.collect_leaves(out);
                }
            }
        }
    }

    pub fn tokens(&self) -> Vec<&str> {
        self.leaves().into_iter().map(|(_, t)| t).collect()
    }

    pub fn text(&self) -> String {
        self.tokens().join(" ")
    }

    /// Phrase nodes in post-order (children before parents); the root is last.
    pub fn phrases(&self) -> Vec<&ParseTree> {
        let mut out = Vec::new();
        self.collect_phrases(&mut out);
        out
    }

    fn collect_phrases<'a>(&'a self, out: &mut Vec<&'a ParseTree>) {
        if let ParseTree::Phrase { children, .. } = self {
            for c in children {
                c.collect_phrases(out);
            }
            out.push(self);
        }
    }

    /// Parses the bracketed form, e.g. `(NP (DT the) (NNP kibo) (NN capsule))`.
    pub fn from_bracketed(text: &str) -> Result<ParseTree, LanguageError> {
        let toks = bracket_tokens(text);
        let mut pos = 0;
        let tree = parse_node(&toks, &mut pos)?;
        if pos != toks.len() {
            return Err(LanguageError::BadTree(format!("trailing input in `{text}`")));
        }
        Ok(tree)
    }
}

fn bracket_tokens(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match c {
            '(' | ')' => {
                if let Some(s) = start.take() {
                    out.push(&text[s..i]);
                }
                out.push(&text[i..i + 1]);
            }
            c if c.is_whitespace() => {
                if let Some(s) = start.take() {
                    out.push(&text[s..i]);
                }
            }
            _ => {
                if start.is_none() {
                    start = Some(i);
                }
            }
        }
    }
    if let Some(s) = start {
        out.push(&text[s..]);
    }
    out
}

fn parse_node(toks: &[&str], pos: &mut usize) -> Result<ParseTree, LanguageError> {
    let bad = |m: &str| LanguageError::BadTree(m.to_string());
    if toks.get(*pos) != Some(&"(") {
        return Err(bad("expected `(`"));
    }
    *pos += 1;
    let label = match toks.get(*pos) {
        Some(l) if *l != "(" && *l != ")" => l.to_string(),
        _ => return Err(bad("expected a label")),
    };
    *pos += 1;
    match toks.get(*pos) {
        Some(&"(") => {
            let mut children = Vec::new();
            while toks.get(*pos) == Some(&"(") {
                children.push(parse_node(toks, pos)?);
            }
            if toks.get(*pos) != Some(&")") {
                return Err(bad("expected `)` after children"));
            }
            *pos += 1;
            Ok(ParseTree::Phrase { label, children })
        }
        Some(&")") | None => Err(bad("empty node")),
        Some(token) => {
            let token = token.to_string();
            *pos += 1;
            if toks.get(*pos) != Some(&")") {
                return Err(bad("terminal node must hold exactly one token"));
            }
            *pos += 1;
            Ok(ParseTree::Terminal { tag: label, token })
        }
    }
}

impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseTree::Terminal { tag, token } => write!(f, "({tag} {token})"),
            ParseTree::Phrase { label, children } => {
                write!(f, "({label}")?;
                for c in children {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
        }
    }
}
