//! Optimistic bounding of amplitudes over the frequency range.

use serde::{Deserialize, Serialize};

use super::{RequiredInput, SineProbe};
use crate::error::{Error, Result};

/// One executed sinusoidal probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub amplitude: f64,
    pub dnl: f64,
}

/// Outcome of a bisection at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSearch {
    pub amplitude: f64,
    /// Probes in execution order.
    pub probes: Vec<Probe>,
}

/// Largest amplitude at `frequency` whose sinusoid keeps the degree of
/// non-linearity within the threshold.
///
/// `a_max` is probed first and returned when it passes. Otherwise `(0, a_max]`
/// is bisected until the bracket is narrower than `delta_a`, and the greatest
/// passing amplitude is returned. When nothing passes, the smallest probed
/// amplitude is returned. A diverged probe fails.
pub fn binary_search_upperbound<P: SineProbe + ?Sized>(
    probe: &P,
    frequency: f64,
    input: &RequiredInput,
) -> Result<BoundSearch> {
    input.validate()?;
    if !(input.f_min..=input.f_max).contains(&frequency) {
        return Err(Error::InvalidInput(format!(
            "frequency {frequency} outside [{}, {}]",
            input.f_min, input.f_max
        )));
    }
    let mut probes = Vec::new();
    let mut run = |amplitude: f64| -> Result<bool> {
        let dnl = probe.sine_dnl(frequency, amplitude, input)?;
        probes.push(Probe { amplitude, dnl });
        Ok(dnl <= input.dnl_threshold)
    };

    if run(input.a_max)? {
        return Ok(BoundSearch {
            amplitude: input.a_max,
            probes,
        });
    }
    let (mut lo, mut hi) = (0.0, input.a_max);
    let mut best = None;
    while hi - lo >= input.delta_a {
        let mid = 0.5 * (lo + hi);
        if run(mid)? {
            lo = mid;
            best = Some(mid);
        } else {
            hi = mid;
        }
    }
    Ok(BoundSearch {
        amplitude: best.unwrap_or(hi),
        probes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Midpoint {
    #[default]
    Geometric,
    Arithmetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundingOptions {
    /// Largest number of sampled frequencies.
    pub max_frequencies: usize,
    pub midpoint: Midpoint,
}

impl Default for BoundingOptions {
    fn default() -> Self {
        BoundingOptions {
            max_frequencies: 256,
            midpoint: Midpoint::Geometric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub frequency: f64,
    pub bound: f64,
}

/// Frequency to amplitude bound, ordered by frequency.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AmplitudeBoundMap {
    entries: Vec<BoundEntry>,
}

impl AmplitudeBoundMap {
    /// Builds a map from arbitrary entries; frequencies must be distinct.
    pub fn from_entries(mut entries: Vec<BoundEntry>) -> Result<Self> {
        if entries
            .iter()
            .any(|e| !(e.frequency.is_finite() && e.bound.is_finite() && e.bound >= 0.0))
        {
            return Err(Error::InvalidInput("bound entries must be finite".into()));
        }
        entries.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
        if entries.windows(2).any(|w| w[0].frequency == w[1].frequency) {
            return Err(Error::InvalidInput("duplicate bound frequency".into()));
        }
        Ok(AmplitudeBoundMap { entries })
    }

    pub fn entries(&self) -> &[BoundEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.frequency)
    }

    /// Largest bound difference between adjacent entries.
    pub fn max_adjacent_gap(&self) -> f64 {
        self.entries
            .windows(2)
            .map(|w| (w[1].bound - w[0].bound).abs())
            .fold(0.0, f64::max)
    }

    /// Linear interpolation in frequency, clamped to the end entries.
    pub fn interpolate(&self, frequency: f64) -> Result<f64> {
        let (first, last) = match (self.entries.first(), self.entries.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::InsufficientData("empty bound map".into())),
        };
        if frequency <= first.frequency {
            return Ok(first.bound);
        }
        if frequency >= last.frequency {
            return Ok(last.bound);
        }
        let i = self.entries.partition_point(|e| e.frequency <= frequency);
        let (a, b) = (self.entries[i - 1], self.entries[i]);
        let t = (frequency - a.frequency) / (b.frequency - a.frequency);
        Ok(a.bound + t * (b.bound - a.bound))
    }

    fn insert(&mut self, entry: BoundEntry) {
        let i = self.entries.partition_point(|e| e.frequency < entry.frequency);
        self.entries.insert(i, entry);
    }
}

/// A gap left open by the refinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundDiagnostic {
    /// The map reached `max_frequencies` entries with this gap still open.
    FrequencyCap { max_frequencies: usize, open_gap: f64 },
    /// The midpoint of the pair cannot be told apart from its ends, so the
    /// gap cannot shrink any further.
    Unresolvable { f_lo: f64, f_hi: f64, open_gap: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundingReport {
    pub map: AmplitudeBoundMap,
    /// Per sampled frequency, in sampling order.
    pub searches: Vec<(f64, BoundSearch)>,
    /// Gaps above `delta_a` left in the map; empty when refinement converged.
    pub diagnostics: Vec<BoundDiagnostic>,
}

impl BoundingReport {
    pub fn probe_count(&self) -> usize {
        self.searches.iter().map(|(_, s)| s.probes.len()).sum()
    }

    pub fn converged(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

/// Samples bounds at `f_min` and `f_max`, then repeatedly at the midpoint of
/// the adjacent pair with the widest bound gap, while that gap exceeds
/// `delta_a`.
///
/// A pair whose midpoint has the same effective frequency as one of its ends
/// is closed and reported. Refinement stops at `max_frequencies` entries.
pub fn optimistic_amplitude_bound<P: SineProbe + ?Sized>(
    probe: &P,
    input: &RequiredInput,
    options: &BoundingOptions,
) -> Result<BoundingReport> {
    input.validate()?;
    if options.max_frequencies < 2 {
        return Err(Error::InvalidInput("max_frequencies must be >= 2".into()));
    }
    let mut map = AmplitudeBoundMap::default();
    let mut searches = Vec::new();
    let mut sample = |f: f64, map: &mut AmplitudeBoundMap| -> Result<()> {
        let search = binary_search_upperbound(probe, f, input)?;
        map.insert(BoundEntry {
            frequency: f,
            bound: search.amplitude,
        });
        searches.push((f, search));
        Ok(())
    };
    sample(input.f_min, &mut map)?;
    sample(input.f_max, &mut map)?;

    let mut diagnostics = Vec::new();
    // lower frequencies of pairs that cannot be refined
    let mut closed: Vec<f64> = Vec::new();
    loop {
        let widest = map
            .entries
            .windows(2)
            .enumerate()
            .filter(|(_, w)| !closed.contains(&w[0].frequency))
            .map(|(i, w)| (i, (w[1].bound - w[0].bound).abs()))
            .filter(|&(_, gap)| gap > input.delta_a)
            .fold(None, |acc: Option<(usize, f64)>, cur| match acc {
                Some(best) if best.1 >= cur.1 => Some(best),
                _ => Some(cur),
            });
        let Some((i, gap)) = widest else { break };
        if map.len() >= options.max_frequencies {
            diagnostics.push(BoundDiagnostic::FrequencyCap {
                max_frequencies: options.max_frequencies,
                open_gap: gap,
            });
            break;
        }
        let (lo, hi) = (map.entries[i].frequency, map.entries[i + 1].frequency);
        let mid = match options.midpoint {
            Midpoint::Geometric => (lo * hi).sqrt(),
            Midpoint::Arithmetic => 0.5 * (lo + hi),
        };
        let effective = |f| probe.effective_frequency(f, input);
        let distinct = mid > lo
            && mid < hi
            && effective(mid)? != effective(lo)?
            && effective(mid)? != effective(hi)?;
        if !distinct {
            closed.push(lo);
            diagnostics.push(BoundDiagnostic::Unresolvable {
                f_lo: lo,
                f_hi: hi,
                open_gap: gap,
            });
            continue;
        }
        sample(mid, &mut map)?;
    }
    for d in &diagnostics {
        log::warn!("amplitude bound gap left open: {d:?}");
    }
    Ok(BoundingReport {
        map,
        searches,
        diagnostics,
    })
}
