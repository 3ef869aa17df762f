//! CSV output. Rows are written in a fixed order with `\n` terminators and no
//! timestamps, so identical runs produce identical bytes.

use std::io::Write;

use super::faceoff::FaceoffResult;
use super::train::EpisodeMetrics;
use super::types::TypeLogRow;
use crate::error::Result;
use crate::learning::Algorithm;

pub(crate) fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn joined<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

/// `episode,group,algorithm,cumulative_reward,loss,alive_at_end`; the loss is
/// empty for episodes without an update.
pub fn write_metrics_csv<W: Write>(out: W, metrics: &[EpisodeMetrics], algorithms: &[Algorithm]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["episode", "group", "algorithm", "cumulative_reward", "loss", "alive_at_end"])?;
    for row in metrics {
        for (g, m) in row.groups.iter().enumerate() {
            w.write_record([
                row.episode.to_string(),
                g.to_string(),
                algorithms[g].to_string(),
                m.reward.to_string(),
                m.loss.map(|l| l.to_string()).unwrap_or_default(),
                m.alive_at_end.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `episode,steps,purity` for runs with inferred types.
pub fn write_purity_csv<W: Write>(out: W, metrics: &[EpisodeMetrics]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["episode", "steps", "purity"])?;
    for row in metrics {
        w.write_record([
            row.episode.to_string(),
            row.steps.to_string(),
            row.purity.map(|p| p.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per game; list columns are `;`-separated, indexed by group.
pub fn write_faceoff_csv<W: Write>(out: W, result: &FaceoffResult) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["game", "lineup", "winner_groups", "alive", "rewards"])?;
    for r in &result.records {
        let names: Vec<&str> = r.lineup.iter().map(|&c| result.contestants[c].as_str()).collect();
        w.write_record([
            r.game.to_string(),
            names.join(";"),
            joined(&r.winners),
            joined(&r.alive),
            joined(&r.rewards),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-contestant totals of a faceoff.
pub fn write_faceoff_summary_csv<W: Write>(out: W, result: &FaceoffResult) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["contestant", "wins", "games"])?;
    for (name, wins) in result.contestants.iter().zip(&result.wins_per_contestant) {
        w.write_record([name.clone(), wins.to_string(), result.games.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_type_log_csv<W: Write>(out: W, rows: &[TypeLogRow]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["episode", "step", "agent", "type"])?;
    for r in rows {
        w.write_record([r.episode.to_string(), r.step.to_string(), r.agent.to_string(), r.label.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
