//! Built-in parameter sets for the standard figure panels.

use crate::params::Knobs;
use crate::sweep::{Axis, KnobName, SweepSpec};

pub const FIGURE_IDS: [&str; 8] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"];

/// Grid points per axis when none is requested.
pub const DEFAULT_GRID: usize = 41;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Headline {
    Squeezing,
    Antisqueezing,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Figure {
    /// Time traces for one knob stepped through a handful of values.
    Family { vary: KnobName, values: Vec<f64>, base: Knobs },
    /// Zero-frequency noise over a two-knob grid.
    Contour { spec: SweepSpec, headline: Headline },
}

fn contour(axis1: (KnobName, f64, f64), axis2: (KnobName, f64, f64), fixed: Knobs, headline: Headline, n: usize) -> Figure {
    let axis = |(knob, min, max): (KnobName, f64, f64)| Axis { knob, min, max, count: n };
    Figure::Contour {
        spec: SweepSpec { axis1: axis(axis1), axis2: axis(axis2), fixed, target_squeezing_db: None },
        headline,
    }
}

/// Parameter set for `id`, with `n` points per contour axis.
pub fn figure(id: &str, n: usize) -> Option<Figure> {
    use Headline::*;
    use KnobName::*;
    // knob order in Knobs::new: g0, tau_p, f_s, f_p
    let fig = match id {
        "fig2" => Figure::Family {
            vary: TauP,
            values: vec![1.0, 3.0, 5.0, 7.0, 9.0, 11.0],
            base: Knobs::new(1.0, 1.0, 0.045, 0.03),
        },
        "fig3" => Figure::Family {
            vary: FP,
            values: vec![0.01, 0.02, 0.03, 0.04, 0.05, 0.06],
            base: Knobs::new(1.0, 3.0, 0.045, 0.03),
        },
        "fig4" | "fig5" => contour(
            (FS, 0.01, 0.1),
            (TauP, 1.0, 16.0),
            Knobs::new(0.7, 1.0, 0.05, 0.03),
            if id == "fig4" { Squeezing } else { Antisqueezing },
            n,
        ),
        "fig6" | "fig7" => contour(
            (FP, 0.01, 0.06),
            (TauP, 1.0, 16.0),
            Knobs::new(0.7, 1.0, 0.05, 0.03),
            if id == "fig6" { Squeezing } else { Antisqueezing },
            n,
        ),
        "fig8" | "fig9" => contour(
            (G0, 0.5, 2.5),
            (TauP, 1.0, 8.0),
            Knobs::new(1.0, 1.0, 0.05, 0.01),
            if id == "fig8" { Squeezing } else { Antisqueezing },
            n,
        ),
        _ => return None,
    };
    Some(fig)
}
