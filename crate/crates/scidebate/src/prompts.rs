//! Rendering of task descriptions, personas and list blocks into template
//! bindings.

use crate::llm::{TemplateError, TemplateSet};
use crate::profiles::{ExpertiseProfile, ProfileMode, PublicationEntry};
use crate::task::{Objective, TaskSpec};

pub fn task_text(templates: &TemplateSet, task: &TaskSpec) -> Result<String, TemplateError> {
    let id = match task.objective {
        Objective::ProteinTarget => "task_protein_target",
        Objective::Bioactivity => "task_bioactivity",
        Objective::LeadOptimization => "task_lead_optimization",
    };
    let c = task.constraints.unwrap_or_default();
    let (qed, sa, sim) = (c.min_qed.to_string(), c.max_sa.to_string(), c.min_sim.to_string());
    let keywords = task.keywords.join(", ");
    templates.render(
        id,
        &[
            ("description", task.description.trim()),
            ("keywords", &keywords),
            ("seed", task.seed.as_deref().unwrap_or("none")),
            ("min_qed", &qed),
            ("max_sa", &sa),
            ("min_sim", &sim),
        ],
    )
}

pub fn publications_block(pubs: &[PublicationEntry]) -> String {
    if pubs.is_empty() {
        return "(none)".into();
    }
    pubs.iter()
        .enumerate()
        .map(|(i, p)| format!("{}. {}\n   {}", i + 1, p.title.trim(), p.abstract_text.trim()))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn smiles_block<S: AsRef<str>>(smiles: &[S]) -> String {
    if smiles.is_empty() {
        return "(none)".into();
    }
    smiles
        .iter()
        .map(|s| format!("- {}", s.as_ref()))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn system_prompt(templates: &TemplateSet, profile: &ExpertiseProfile) -> Result<String, TemplateError> {
    let name = profile.name.as_str();
    match profile.mode {
        ProfileMode::Vanilla => templates.render("vanilla_system", &[]),
        ProfileMode::Role => templates.render(
            "role_system",
            &[("name", name), ("role", profile.role.as_deref().unwrap_or(""))],
        ),
        ProfileMode::Keyword => {
            let kw = profile.keywords.join(", ");
            templates.render("keyword_system", &[("name", name), ("keywords", &kw)])
        }
        _ => templates.render(
            "scientist_system",
            &[
                ("name", name),
                ("publications", &publications_block(&profile.publications)),
                ("molecules", &smiles_block(&profile.molecules)),
            ],
        ),
    }
}
