use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::engine::RoundSnapshot;
use super::pool::Candidate;

/// One transcript line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub round: usize,
    pub phase: String,
    pub agent: Option<String>,
    pub payload: Value,
}

/// Receives the coordinator's output as the campaign runs.
pub trait EventSink {
    fn record(&mut self, event: &Event) -> std::io::Result<()>;

    /// Called after the last event of each phase.
    fn end_phase(&mut self) -> std::io::Result<()> {
        Ok(())
    }

    /// Called once per round with the whole pool and the round's metrics.
    fn end_round(&mut self, _pool: &[Candidate], _snapshot: &RoundSnapshot) -> std::io::Result<()> {
        Ok(())
    }
}

/// Keeps everything in memory.
#[derive(Debug, Default)]
pub struct MemorySink {
    pub events: Vec<Event>,
    pub snapshots: Vec<RoundSnapshot>,
    pub phases_flushed: usize,
}

impl EventSink for MemorySink {
    fn record(&mut self, event: &Event) -> std::io::Result<()> {
        self.events.push(event.clone());
        Ok(())
    }

    fn end_phase(&mut self) -> std::io::Result<()> {
        self.phases_flushed += 1;
        Ok(())
    }

    fn end_round(&mut self, _pool: &[Candidate], snapshot: &RoundSnapshot) -> std::io::Result<()> {
        self.snapshots.push(snapshot.clone());
        Ok(())
    }
}
