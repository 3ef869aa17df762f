use std::io::Write;

use super::AgentId;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    Kill { victim: AgentId },
    Death,
    Collect,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Kill { .. } => "kill",
            EventKind::Death => "death",
            EventKind::Collect => "collect",
        }
    }
}

/// Something that happened to `agent` during step `step`; `value` is the
/// reward attached to it.
#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    pub step: u64,
    pub agent: AgentId,
    pub kind: EventKind,
    pub value: f64,
}

/// Writes `step,agent,event,value` rows with a header.
pub fn write_events_csv<W: Write>(out: W, events: &[Event]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["step", "agent", "event", "value"])?;
    for e in events {
        w.write_record([
            e.step.to_string(),
            e.agent.to_string(),
            e.kind.name().to_string(),
            e.value.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
