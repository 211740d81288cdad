//! Single-sided DFT amplitude spectra and the metrics built on them.
//!
//! Amplitudes are normalized so that a sinusoid of amplitude `a` produces a
//! single component of amplitude `a` and a constant `c` produces `c` at 0 Hz:
//! interior bins are scaled by `2/N`, the 0 Hz and Nyquist bins by `1/N`.
//! No window is applied; callers are expected to pass whole periods.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::{TimeSeries, Trace};

/// One frequency-amplitude coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    /// Hz.
    pub frequency: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    frequencies: Vec<f64>,
    amplitudes: Vec<f64>,
}

impl Spectrum {
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Spacing between adjacent bins, in Hz.
    pub fn resolution(&self) -> f64 {
        self.frequencies.get(1).copied().unwrap_or(0.0)
    }

    pub fn max_amplitude(&self) -> f64 {
        self.amplitudes.iter().copied().fold(0.0, f64::max)
    }

    pub fn component(&self, bin: usize) -> Component {
        Component {
            frequency: self.frequencies[bin],
            amplitude: self.amplitudes[bin],
        }
    }

    /// Largest component above 0 Hz. The first bin wins ties.
    pub fn main_component(&self) -> Option<Component> {
        let mut best: Option<usize> = None;
        for bin in 1..self.len() {
            if self.amplitudes[bin] > best.map_or(0.0, |b| self.amplitudes[b]) {
                best = Some(bin);
            }
        }
        best.map(|b| self.component(b))
    }

    /// Bin holding `frequency`, if it lies within a hundredth of a bin of one.
    pub fn bin_of(&self, frequency: f64) -> Option<usize> {
        let df = self.resolution();
        if df <= 0.0 || frequency < 0.0 {
            return None;
        }
        let bin = (frequency / df).round();
        let index = bin as usize;
        (index < self.len() && (frequency - bin * df).abs() <= 0.01 * df).then_some(index)
    }
}

/// Single-sided amplitude spectrum; `N` samples give `N/2 + 1` bins.
pub fn dft_amplitude(series: &TimeSeries) -> Result<Spectrum> {
    let n = series.len();
    if n < 2 {
        return Err(Error::DegenerateSpectrum("a spectrum needs at least two samples"));
    }
    let mut buffer: Vec<Complex<f64>> = series
        .samples()
        .iter()
        .map(|&x| Complex::new(x, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buffer);

    let bins = n / 2 + 1;
    let scale = 1.0 / n as f64;
    let df = 1.0 / (n as f64 * series.sample_interval());
    let amplitudes = (0..bins)
        .map(|k| {
            let edge = k == 0 || (n % 2 == 0 && k == n / 2);
            let factor = if edge { scale } else { 2.0 * scale };
            buffer[k].norm() * factor
        })
        .collect();
    let frequencies = (0..bins).map(|k| k as f64 * df).collect();
    Ok(Spectrum {
        frequencies,
        amplitudes,
    })
}

/// Relevant components of a signal: those strictly above `rho` times the
/// largest amplitude of its spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSet {
    components: Vec<Component>,
    bins: Vec<usize>,
    rho: f64,
    max_amplitude: f64,
}

impl ComponentSet {
    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Spectrum bins of the components, ascending.
    pub fn bins(&self) -> &[usize] {
        &self.bins
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Largest amplitude of the analysed spectrum.
    pub fn max_amplitude(&self) -> f64 {
        self.max_amplitude
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn contains_bin(&self, bin: usize) -> bool {
        self.bins.binary_search(&bin).is_ok()
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidSignal(format!("rho must lie in (0, 1), got {rho}")))
    }
}

/// Relevant components of an already computed spectrum.
pub fn fa_map_of(spectrum: &Spectrum, rho: f64) -> Result<ComponentSet> {
    check_rho(rho)?;
    let max = spectrum.max_amplitude();
    if max <= 0.0 {
        return Err(Error::DegenerateSpectrum("all-zero signal has no components"));
    }
    let threshold = rho * max;
    let bins: Vec<usize> = (0..spectrum.len())
        .filter(|&k| spectrum.amplitudes[k] > threshold)
        .collect();
    Ok(ComponentSet {
        components: bins.iter().map(|&k| spectrum.component(k)).collect(),
        bins,
        rho,
        max_amplitude: max,
    })
}

pub fn fa_map(series: &TimeSeries, rho: f64) -> Result<ComponentSet> {
    fa_map_of(&dft_amplitude(series)?, rho)
}

/// Which reference amplitude normalizes the degree of non-linearity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DnlNormalization {
    /// Largest reference component, 0 Hz included.
    #[default]
    IncludeDc,
    /// Largest reference component above 0 Hz.
    ExcludeDc,
}

/// Spectra and relevant components of a trace, computed once.
#[derive(Debug, Clone)]
pub struct TraceSpectra {
    pub reference: Spectrum,
    pub output: Spectrum,
    pub relevant: ComponentSet,
}

impl TraceSpectra {
    pub fn new(trace: &Trace, rho: f64) -> Result<Self> {
        let reference = dft_amplitude(trace.reference())?;
        let output = dft_amplitude(trace.output())?;
        let relevant = fa_map_of(&reference, rho)?;
        Ok(TraceSpectra {
            reference,
            output,
            relevant,
        })
    }

    pub fn degree_of_nonlinearity(&self, normalization: DnlNormalization) -> Result<f64> {
        let denominator = match normalization {
            DnlNormalization::IncludeDc => self.relevant.max_amplitude(),
            DnlNormalization::ExcludeDc => self
                .reference
                .main_component()
                .map_or(0.0, |c| c.amplitude),
        };
        if denominator <= 0.0 {
            return Err(Error::DegenerateSpectrum("reference has no non-zero component"));
        }
        let numerator = (0..self.output.len())
            .filter(|&k| !self.relevant.contains_bin(k))
            .map(|k| self.output.amplitudes[k])
            .fold(0.0, f64::max);
        Ok(numerator / denominator)
    }

    pub fn dof_profile(&self) -> Vec<DofPoint> {
        self.relevant
            .bins()
            .iter()
            .map(|&k| self.dof_at_bin(k))
            .collect()
    }

    /// Degree of filtering at a relevant component frequency.
    pub fn dof_at(&self, frequency: f64) -> Result<DofPoint> {
        match self.reference.bin_of(frequency) {
            Some(bin) if self.relevant.contains_bin(bin) => Ok(self.dof_at_bin(bin)),
            _ => Err(Error::NotARelevantComponent(frequency)),
        }
    }

    fn dof_at_bin(&self, bin: usize) -> DofPoint {
        let input = self.reference.amplitudes[bin];
        DofPoint {
            frequency: self.reference.frequencies[bin],
            amplitude: input,
            dof: 1.0 - self.output.amplitudes[bin] / input,
        }
    }
}

/// Degree of filtering at one relevant reference component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DofPoint {
    pub frequency: f64,
    /// Reference amplitude of the component.
    pub amplitude: f64,
    pub dof: f64,
}

/// Largest output amplitude outside the relevant reference components,
/// relative to the largest reference amplitude.
pub fn degree_of_nonlinearity(trace: &Trace, rho: f64) -> Result<f64> {
    TraceSpectra::new(trace, rho)?.degree_of_nonlinearity(DnlNormalization::IncludeDc)
}

pub fn degree_of_nonlinearity_with(
    trace: &Trace,
    rho: f64,
    normalization: DnlNormalization,
) -> Result<f64> {
    TraceSpectra::new(trace, rho)?.degree_of_nonlinearity(normalization)
}

/// `1 - |Y(f)| / |R(f)|` at every relevant reference component.
pub fn dof_profile(trace: &Trace, rho: f64) -> Result<Vec<DofPoint>> {
    Ok(TraceSpectra::new(trace, rho)?.dof_profile())
}

pub fn dof_at(trace: &Trace, rho: f64, frequency: f64) -> Result<DofPoint> {
    TraceSpectra::new(trace, rho)?.dof_at(frequency)
}
