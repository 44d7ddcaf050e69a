use std::fs;
use std::path::Path;

use lcspg::game::GameDocument;
use lcspg::lcs::{LcsDocument, LcsError};
use lcspg::{ExplicitGame, Sglcs};

use crate::CliError;

#[derive(Debug, Clone)]
pub enum Model {
    Game(ExplicitGame),
    Lcs(Sglcs),
}

pub fn parse_model(path: &Path) -> Result<Model, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_model_str(&text, &path.display().to_string())
}

/// Parses a JSON model: a channel system has `controls`, an explicit game has
/// `states`. `origin` prefixes error positions.
pub fn parse_model_str(text: &str, origin: &str) -> Result<Model, CliError> {
    let syntax = |e: serde_json::Error| CliError::Syntax {
        origin: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    };
    let value: serde_json::Value = serde_json::from_str(text).map_err(syntax)?;
    let Some(obj) = value.as_object() else {
        return Err(invalid("document", "expected a JSON object"));
    };
    if obj.contains_key("controls") {
        let doc: LcsDocument = serde_json::from_str(text).map_err(syntax)?;
        return Sglcs::from_document(&doc)
            .map(Model::Lcs)
            .map_err(|e| match e {
                LcsError::Validation { field, message } => CliError::Validation { field, message },
                other => invalid("model", &other.to_string()),
            });
    }
    if obj.contains_key("states") {
        let doc: GameDocument = serde_json::from_str(text).map_err(syntax)?;
        let game =
            ExplicitGame::from_document(&doc).map_err(|e| invalid("states", &e.to_string()))?;
        let problems = game.validate();
        if !problems.is_empty() {
            return Err(invalid("states", &problems.join("; ")));
        }
        return Ok(Model::Game(game));
    }
    Err(invalid(
        "document",
        "expected `controls` (channel system) or `states` (explicit game)",
    ))
}

fn invalid(field: &str, message: &str) -> CliError {
    CliError::Validation {
        field: field.to_string(),
        message: message.to_string(),
    }
}
