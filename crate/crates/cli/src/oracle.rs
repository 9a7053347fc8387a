use std::fmt;

use arise_core::Game;

use crate::error::HarnessError;

/// Noise-free ground truth at one candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub id: usize,
    pub coords: Vec<f64>,
    pub utilities: Vec<f64>,
    pub gains: Vec<f64>,
    pub loss: f64,
}

pub fn oracle_at(game: &Game, id: usize) -> OracleReport {
    OracleReport {
        id,
        coords: game.space().coords(id).to_vec(),
        utilities: game.exact_utilities(id),
        gains: (0..game.agents()).map(|i| game.best_response_gain(i, id)).collect(),
        loss: game.exact_loss(id),
    }
}

/// Parses `a,b,...` and finds the matching candidate.
pub fn locate(game: &Game, coords: &str) -> Result<usize, HarnessError> {
    let values = coords
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| HarnessError::Invalid(vec![format!("--x `{coords}`: {e}")]))?;
    let space = game.space();
    if values.len() != space.dim() {
        return Err(HarnessError::Invalid(vec![format!(
            "--x needs {} coordinates, got {}",
            space.dim(),
            values.len()
        )]));
    }
    space.find(&values, 1e-9).ok_or_else(|| {
        let near = space.nearest(&values).map(|id| format!(" (nearest: {:?})", space.coords(id)));
        HarnessError::Invalid(vec![format!(
            "{values:?} is not a candidate{}",
            near.unwrap_or_default()
        )])
    })
}

/// Candidates with the smallest exact loss (ties within `1e-12`).
pub fn minimizers(game: &Game) -> Vec<usize> {
    let losses = game.loss_table();
    let best = losses.iter().copied().fold(f64::INFINITY, f64::min);
    (0..losses.len()).filter(|&id| losses[id] <= best + 1e-12).collect()
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "candidate {} at {:?}", self.id, self.coords)?;
        for (i, (u, g)) in self.utilities.iter().zip(&self.gains).enumerate() {
            writeln!(f, "  agent {i}: utility {u:.12}  best-response gain {g:.12}")?;
        }
        write!(f, "  exact loss {:.12}", self.loss)
    }
}
