//! `{placeholder}` templates. `{{` and `}}` are literal braces.

use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("template {template}: unbound placeholder {{{name}}}")]
    Unbound { template: String, name: String },
    #[error("template {template}: malformed braces at byte {offset}")]
    Syntax { template: String, offset: usize },
    #[error("unknown template {0:?}")]
    Unknown(String),
    #[error("cannot read template {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Text(String),
    Slot(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    id: String,
    segments: Vec<Segment>,
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

impl Template {
    pub fn parse(id: &str, body: &str) -> Result<Self, TemplateError> {
        let syntax = |offset| TemplateError::Syntax {
            template: id.into(),
            offset,
        };
        let mut segments = Vec::new();
        let mut text = String::new();
        let mut chars = body.char_indices().peekable();
        while let Some((i, c)) = chars.next() {
            match c {
                '{' if chars.peek().map(|p| p.1) == Some('{') => {
                    chars.next();
                    text.push('{');
                }
                '}' if chars.peek().map(|p| p.1) == Some('}') => {
                    chars.next();
                    text.push('}');
                }
                '{' => {
                    let mut name = String::new();
                    loop {
                        match chars.next() {
                            Some((_, '}')) if !name.is_empty() => break,
                            Some((_, ch)) if is_name_char(ch) => name.push(ch),
                            _ => return Err(syntax(i)),
                        }
                    }
                    if !text.is_empty() {
                        segments.push(Segment::Text(std::mem::take(&mut text)));
                    }
                    segments.push(Segment::Slot(name));
                }
                '}' => return Err(syntax(i)),
                _ => text.push(c),
            }
        }
        if !text.is_empty() {
            segments.push(Segment::Text(text));
        }
        Ok(Self {
            id: id.into(),
            segments,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Placeholder names in order of first appearance.
    pub fn placeholders(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for s in &self.segments {
            if let Segment::Slot(n) = s {
                if !out.contains(&n.as_str()) {
                    out.push(n);
                }
            }
        }
        out
    }

    /// Plain substitution; values are inserted verbatim.
    pub fn render(&self, bindings: &[(&str, &str)]) -> Result<String, TemplateError> {
        let mut out = String::new();
        for s in &self.segments {
            match s {
                Segment::Text(t) => out.push_str(t),
                Segment::Slot(name) => {
                    let v = bindings
                        .iter()
                        .find(|(k, _)| k == name)
                        .ok_or_else(|| TemplateError::Unbound {
                            template: self.id.clone(),
                            name: name.clone(),
                        })?;
                    out.push_str(v.1);
                }
            }
        }
        Ok(out)
    }
}

macro_rules! builtin {
    ($($id:literal),* $(,)?) => {
        &[$(($id, include_str!(concat!("../../templates/", $id, ".txt")))),*]
    };
}

const BUILTIN: &[(&str, &str)] = builtin!(
    "scientist_system",
    "role_system",
    "keyword_system",
    "vanilla_system",
    "task_protein_target",
    "task_bioactivity",
    "task_lead_optimization",
    "proposal",
    "proposal_repair",
    "critique_self",
    "critique_cross",
    "critique_repair",
    "voting",
    "voting_repair",
    "role_generation",
    "keyword_extraction",
    "llm_profile_pub",
    "llm_profile_mol",
);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    templates: BTreeMap<String, Template>,
}

impl TemplateSet {
    pub fn ids() -> impl Iterator<Item = &'static str> {
        BUILTIN.iter().map(|(id, _)| *id)
    }

    pub fn builtin() -> Self {
        let templates = BUILTIN
            .iter()
            .map(|(id, body)| {
                let t = Template::parse(id, body).expect("bundled templates are well formed");
                (id.to_string(), t)
            })
            .collect();
        Self { templates }
    }

    /// Built-ins, with any `<id>.txt` found in `dir` taking precedence.
    pub fn with_overrides(dir: &Path) -> Result<Self, TemplateError> {
        let mut set = Self::builtin();
        for id in Self::ids() {
            let path = dir.join(format!("{id}.txt"));
            if !path.exists() {
                continue;
            }
            let body = std::fs::read_to_string(&path).map_err(|e| TemplateError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            set.templates.insert(id.into(), Template::parse(id, &body)?);
        }
        Ok(set)
    }

    pub fn get(&self, id: &str) -> Result<&Template, TemplateError> {
        self.templates
            .get(id)
            .ok_or_else(|| TemplateError::Unknown(id.into()))
    }

    pub fn render(&self, id: &str, bindings: &[(&str, &str)]) -> Result<String, TemplateError> {
        self.get(id)?.render(bindings)
    }
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::builtin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hello() {
        let t = Template::parse("greet", "Hello {name}").unwrap();
        assert_eq!(t.render(&[("name", "X")]).unwrap(), "Hello X");
        assert_eq!(
            t.render(&[]),
            Err(TemplateError::Unbound {
                template: "greet".into(),
                name: "name".into()
            })
        );
    }

    #[test]
    fn escapes_and_syntax() {
        let t = Template::parse("j", "{{\"a\": {v}}}").unwrap();
        assert_eq!(t.render(&[("v", "{x}")]).unwrap(), "{\"a\": {x}}");
        assert!(matches!(Template::parse("b", "a { b"), Err(TemplateError::Syntax { offset: 2, .. })));
        assert!(matches!(Template::parse("b", "a } b"), Err(TemplateError::Syntax { offset: 2, .. })));
        assert!(matches!(Template::parse("b", "{}"), Err(TemplateError::Syntax { .. })));
        assert!(matches!(Template::parse("b", "{open"), Err(TemplateError::Syntax { .. })));
    }

    #[test]
    fn builtins_parse_and_list_placeholders() {
        let set = TemplateSet::builtin();
        assert_eq!(set.get("proposal").unwrap().placeholders(), ["round", "task", "context", "k"]);
        assert!(matches!(set.get("nope"), Err(TemplateError::Unknown(_))));
    }

    #[test]
    fn override_dir() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("vanilla_system.txt"), "custom {x}").unwrap();
        let set = TemplateSet::with_overrides(dir.path()).unwrap();
        assert_eq!(set.render("vanilla_system", &[("x", "1")]).unwrap(), "custom 1");
        assert!(set.render("proposal", &[]).is_err());
    }
}
