//! Spike trains to state matrices: one row per time slot, one column per
//! neuron, each entry the spike count of that neuron in that slot.

use crate::cone::StateMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikeEvent {
    /// 1-based neuron id.
    pub neuron: usize,
    /// Seconds since the start of the recording.
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpikeTrain {
    events: Vec<SpikeEvent>,
    neuron_count: usize,
    duration: f64,
}

impl SpikeTrain {
    pub fn new(neuron_count: usize, duration: f64, mut events: Vec<SpikeEvent>) -> Result<Self> {
        if neuron_count == 0 {
            return Err(Error::InvalidSpikes("neuron count must be positive".into()));
        }
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidSpikes(format!("invalid duration {duration}")));
        }
        for e in &events {
            if e.neuron == 0 || e.neuron > neuron_count {
                return Err(Error::InvalidSpikes(format!(
                    "neuron id {} outside 1..={neuron_count}",
                    e.neuron
                )));
            }
            if !(e.time >= 0.0 && e.time < duration) {
                return Err(Error::InvalidSpikes(format!(
                    "spike time {} outside [0, {duration})",
                    e.time
                )));
            }
        }
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        Ok(Self {
            events,
            neuron_count,
            duration,
        })
    }

    pub fn events(&self) -> &[SpikeEvent] {
        &self.events
    }

    pub fn neuron_count(&self) -> usize {
        self.neuron_count
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Parse a spike file: a `# neurons=<n> duration=<seconds>` header,
    /// then one `neuronId<TAB>time` record per line. Other `#` lines are
    /// comments, and any whitespace separates the two fields.
    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<(usize, f64)> = None;
        let mut events = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = lineno + 1;
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if header.is_none() {
                    header = parse_header(comment, lineno)?;
                }
                continue;
            }
            let mut fields = line.split_whitespace();
            let (Some(id), Some(time), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected `neuronId<TAB>time`, got {raw:?}"),
                });
            };
            let neuron = id.parse::<usize>().map_err(|e| Error::Parse {
                line: lineno,
                message: format!("bad neuron id {id:?}: {e}"),
            })?;
            let time = time.parse::<f64>().map_err(|e| Error::Parse {
                line: lineno,
                message: format!("bad spike time {time:?}: {e}"),
            })?;
            events.push(SpikeEvent { neuron, time });
        }
        let (n, duration) = header.ok_or(Error::Parse {
            line: 1,
            message: "missing `# neurons=<n> duration=<seconds>` header".into(),
        })?;
        Self::new(n, duration, events)
    }
}

fn parse_header(comment: &str, line: usize) -> Result<Option<(usize, f64)>> {
    let mut neurons = None;
    let mut duration = None;
    for token in comment.split_whitespace() {
        let bad = |message: String| Error::Parse { line, message };
        if let Some(v) = token.strip_prefix("neurons=") {
            neurons = Some(
                v.parse::<usize>()
                    .map_err(|e| bad(format!("neurons: {e}")))?,
            );
        } else if let Some(v) = token.strip_prefix("duration=") {
            duration = Some(
                v.parse::<f64>()
                    .map_err(|e| bad(format!("duration: {e}")))?,
            );
        }
    }
    match (neurons, duration) {
        (Some(n), Some(d)) => Ok(Some((n, d))),
        (None, None) => Ok(None),
        _ => Err(Error::Parse {
            line,
            message: "header needs both neurons= and duration=".into(),
        }),
    }
}

/// Slot length `t_s` and number of states `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotConfig {
    pub slot_length: f64,
    pub states: usize,
}

impl SlotConfig {
    pub fn new(slot_length: f64, states: usize) -> Result<Self> {
        if !(slot_length.is_finite() && slot_length > 0.0) {
            return Err(Error::InvalidSpikes(format!(
                "invalid slot length {slot_length}"
            )));
        }
        if states == 0 {
            return Err(Error::InvalidSpikes("state count must be positive".into()));
        }
        Ok(Self {
            slot_length,
            states,
        })
    }
}

#[derive(Debug, Clone)]
pub struct EncodedMatrix {
    pub matrix: StateMatrix,
    /// Spikes after the last slot, which are not counted.
    pub ignored_events: usize,
}

/// Count spikes per `[k·t_s, (k+1)·t_s)` slot and neuron.
pub fn bin_spikes(train: &SpikeTrain, cfg: &SlotConfig) -> Result<EncodedMatrix> {
    let window = cfg.states as f64 * cfg.slot_length;
    if window > train.duration() {
        return Err(Error::InvalidSpikes(format!(
            "{} slots of {} s exceed the recording duration {} s",
            cfg.states,
            cfg.slot_length,
            train.duration()
        )));
    }
    let mut rows = vec![vec![0.0; train.neuron_count()]; cfg.states];
    let mut ignored = 0;
    for e in train.events() {
        let Some(slot) = slot_of(e.time, cfg) else {
            ignored += 1;
            continue;
        };
        rows[slot][e.neuron - 1] += 1.0;
    }
    Ok(EncodedMatrix {
        matrix: StateMatrix::from_rows(&rows)?,
        ignored_events: ignored,
    })
}

fn slot_of(time: f64, cfg: &SlotConfig) -> Option<usize> {
    let t = cfg.slot_length;
    let mut k = (time / t).floor() as usize;
    // Boundaries are the products k·t_s; correct the quotient's rounding.
    if (k as f64) * t > time {
        k = k.saturating_sub(1);
    } else if ((k + 1) as f64) * t <= time {
        k += 1;
    }
    (k < cfg.states).then_some(k)
}
