//! Built-in configurations for the three published rate comparisons.

use std::fmt;
use std::str::FromStr;

use crate::config::ExperimentFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            _ => Err(format!("unknown preset '{s}' (expected fig2, fig3 or fig4)")),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
        })
    }
}

impl Preset {
    /// (Nt, Nr, Ntrx). The 64-antenna comparison is run with 8 chains by
    /// default; `caption_ntrx` selects the 2-chain variant instead.
    pub fn dimensions(self, caption_ntrx: bool) -> (usize, usize, usize) {
        match self {
            Preset::Fig2 => (256, 16, 8),
            Preset::Fig3 => (256, 16, 2),
            Preset::Fig4 if caption_ntrx => (64, 16, 2),
            Preset::Fig4 => (64, 16, 8),
        }
    }

    pub fn title(self, nt: usize, nr: usize, ntrx: usize) -> String {
        format!("{self}: Nt = {nt}, Nr = {nr}, Ntrx = {ntrx}")
    }
}

/// Antenna count after shrinking by `scale`: a perfect square, so the planar
/// array stays square, and a multiple of `ntrx`, so sub-arrays stay whole.
pub fn scaled_antennas(nt: usize, ntrx: usize, scale: f64) -> usize {
    let mut side = ((nt as f64 * scale).sqrt().round() as usize).max(1);
    while side * side < ntrx || !(side * side).is_multiple_of(ntrx) {
        side += 1;
    }
    side * side
}

pub fn preset_file(preset: Preset, scale: f64, caption_ntrx: bool) -> ExperimentFile {
    let (nt, nr, ntrx) = preset.dimensions(caption_ntrx);
    let nt = if scale == 1.0 { nt } else { scaled_antennas(nt, ntrx, scale) };
    ExperimentFile::new(nt, nr, ntrx)
}
