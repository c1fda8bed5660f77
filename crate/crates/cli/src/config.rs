//! Theory configuration: a JSON file overlaid with command-line flags.

use std::path::PathBuf;

use clap::Args;
use opc_core::calculus::{Action, ActionOrder, DEFAULT_MAX_STATES};
use opc_core::theories::DEFAULT_MAX_SUPPORT;
use opc_core::TheoryKind;
use serde::Deserialize;

/// Residual atom appended when atoms are inferred from the input.
pub const RESIDUAL_ATOM: &str = "other";

#[derive(Args, Debug, Default)]
pub struct ConfigArgs {
    /// guarded, convex, semilattice or probgkat
    #[arg(long, global = true)]
    theory: Option<String>,
    /// Comma-separated atom names (default: atoms seen in guards, plus `other`)
    #[arg(long, global = true, value_delimiter = ',')]
    atoms: Option<Vec<String>>,
    /// Comma-separated declared actions (default: any action)
    #[arg(long, global = true, value_delimiter = ',')]
    actions: Option<Vec<String>>,
    /// An action order pair `a<=b`; repeatable
    #[arg(long = "action-order", global = true)]
    action_order: Vec<String>,
    /// JSON theory configuration; flags override its fields
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    max_states: Option<usize>,
    #[arg(long, global = true)]
    max_support: Option<usize>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    theory: Option<String>,
    atoms: Option<Vec<String>>,
    actions: Option<Vec<String>>,
    #[serde(default)]
    action_order: Vec<(String, String)>,
    max_states: Option<usize>,
    max_support: Option<usize>,
}

#[derive(Debug)]
pub struct TheoryConfig {
    pub kind: TheoryKind,
    pub atoms: Option<Vec<String>>,
    pub actions: Option<Vec<String>>,
    pub action_order: Vec<(String, String)>,
    pub max_states: usize,
    pub max_support: usize,
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    let (a, b) = s
        .split_once("<=")
        .ok_or_else(|| format!("action order `{s}` is not of the form a<=b"))?;
    Ok((a.trim().to_string(), b.trim().to_string()))
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<TheoryConfig, String> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                serde_json::from_str::<ConfigFile>(&text)
                    .map_err(|e| format!("{}: {e}", path.display()))?
            }
            None => ConfigFile::default(),
        };
        let name = self
            .theory
            .clone()
            .or(file.theory)
            .ok_or("no theory given; use --theory or a config file")?;
        let kind = TheoryKind::from_name(&name).ok_or_else(|| {
            let known: Vec<_> = TheoryKind::ALL.iter().map(|k| k.name()).collect();
            format!("unknown theory `{name}`; known: {}", known.join(", "))
        })?;
        let mut action_order = file.action_order;
        for s in &self.action_order {
            action_order.push(parse_pair(s)?);
        }
        let max_states = self
            .max_states
            .or(file.max_states)
            .unwrap_or(DEFAULT_MAX_STATES);
        let max_support = self
            .max_support
            .or(file.max_support)
            .unwrap_or(DEFAULT_MAX_SUPPORT);
        if max_states == 0 || max_support == 0 {
            return Err("resource caps must be positive".into());
        }
        Ok(TheoryConfig {
            kind,
            atoms: self.atoms.clone().or(file.atoms),
            actions: self.actions.clone().or(file.actions),
            action_order,
            max_states,
            max_support,
        })
    }
}

impl TheoryConfig {
    pub fn action_order(&self) -> opc_core::Result<ActionOrder> {
        let declared = self
            .actions
            .as_ref()
            .map(|names| names.iter().map(Action::new).collect());
        let pairs = self
            .action_order
            .iter()
            .map(|(a, b)| (Action::new(a), Action::new(b)))
            .collect();
        ActionOrder::new(declared, pairs)
    }
}
