//! Line-delimited JSON trace records.

use std::collections::BTreeMap;
use std::io::{self, Write};

use harmonia_core::calculus::Selected;
use harmonia_core::exchange::{Chain, Cycle, ExchangeOutcome};
use harmonia_core::model::CompositionClass;
use harmonia_core::sensory::Source;
use harmonia_core::transform::{ApplicationEvent, ProposalSource, TransformSpec, TransformationPattern};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub tick: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranked {
    #[serde(flatten)]
    pub selected: Selected,
    pub class: CompositionClass,
    pub chosen: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Event {
    /// Harmonic state under one context. `initial` marks the snapshot
    /// taken before the first tick.
    State {
        context: String,
        state: f64,
        values: Vec<f64>,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        initial: bool,
    },
    Selection {
        context: String,
        ranked: Vec<Ranked>,
    },
    Transform {
        context: String,
        spec: TransformSpec,
        source: ProposalSource,
        predicted_delta: f64,
        hs_before: f64,
        hs_after: f64,
        pattern: Box<TransformationPattern>,
        application: ApplicationEvent,
    },
    Exchange {
        chain: Chain,
        outcome: ExchangeOutcome,
    },
    Cycle {
        cycle: Cycle,
    },
    Priming {
        stubs: Vec<String>,
        frequency: u64,
    },
    /// A stub match, its expansion, or a rule evaluated over matches.
    Expansion {
        #[serde(flatten)]
        detail: Expansion,
    },
    Status {
        from: u64,
        to: u64,
        status: Option<f64>,
        final_state: f64,
        patterns: Vec<TransformationPattern>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum Expansion {
    Matched {
        pattern: String,
        observation: usize,
        score: f64,
        source: Source,
    },
    Expanded {
        pattern: String,
        source: Source,
        reprime: Vec<String>,
    },
    Rule {
        rule: String,
        operands: BTreeMap<String, f64>,
        outcome: f64,
        expanded: bool,
    },
}

/// Receives records in emission order.
pub trait Sink {
    fn emit(&mut self, record: TraceRecord) -> io::Result<()>;
}

impl Sink for Vec<TraceRecord> {
    fn emit(&mut self, record: TraceRecord) -> io::Result<()> {
        self.push(record);
        Ok(())
    }
}

/// Writes one JSON object per line and flushes after each, so a crashed
/// run leaves a trace that is valid line by line.
pub struct JsonlWriter<W: Write> {
    out: W,
}

impl<W: Write> JsonlWriter<W> {
    pub fn new(out: W) -> Self {
        JsonlWriter { out }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> Sink for JsonlWriter<W> {
    fn emit(&mut self, record: TraceRecord) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, &record)?;
        self.out.write_all(b"\n")?;
        self.out.flush()
    }
}

pub fn parse_line(line: &str) -> serde_json::Result<TraceRecord> {
    serde_json::from_str(line)
}
