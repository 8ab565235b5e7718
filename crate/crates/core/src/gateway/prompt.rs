//! Prompt templates for the LOS classification probe.

use std::collections::BTreeMap;

use crate::taxonomy::LOS_CLASS_DEFINITIONS;

use super::GatewayError;

pub const NOTE_PLACEHOLDER: &str = "{note}";
pub const DEFAULT_TEMPLATE_ID: &str = "default";

fn default_template() -> String {
    let classes: String = LOS_CLASS_DEFINITIONS
        .iter()
        .enumerate()
        .map(|(i, d)| format!("{}: {d}\n", i + 1))
        .collect();
    format!(
        "Predict the hospital length-of-stay class for this admission note.\n\
         Classes:\n{classes}\
         Answer with a single digit 1-4.\n\n\
         Admission note:\n{NOTE_PLACEHOLDER}\n\nAnswer:"
    )
}

/// Named prompt templates. Each must contain the `{note}` placeholder
/// exactly once and enumerate the labels 1 to 4.
#[derive(Debug, Clone)]
pub struct PromptRegistry {
    templates: BTreeMap<String, String>,
}

impl Default for PromptRegistry {
    fn default() -> Self {
        let mut templates = BTreeMap::new();
        templates.insert(DEFAULT_TEMPLATE_ID.to_string(), default_template());
        PromptRegistry { templates }
    }
}

impl PromptRegistry {
    pub fn register(&mut self, id: &str, template: &str) -> Result<(), GatewayError> {
        if template.matches(NOTE_PLACEHOLDER).count() != 1 {
            return Err(GatewayError::Config(format!("template {id:?} needs exactly one {NOTE_PLACEHOLDER}")));
        }
        if let Some(l) = ["1", "2", "3", "4"].iter().find(|l| !template.contains(**l)) {
            return Err(GatewayError::Config(format!("template {id:?} does not mention label {l}")));
        }
        self.templates.insert(id.to_string(), template.to_string());
        Ok(())
    }

    pub fn build_prompt(&self, note_text: &str, template_id: &str) -> Result<String, GatewayError> {
        let t = self
            .templates
            .get(template_id)
            .ok_or_else(|| GatewayError::Config(format!("unknown prompt template {template_id:?}")))?;
        Ok(t.replacen(NOTE_PLACEHOLDER, note_text, 1))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(String::as_str)
    }
}
