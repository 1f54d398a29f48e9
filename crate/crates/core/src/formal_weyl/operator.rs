use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::charts::{Chart, ChartKind};
use crate::symbolic::{CRat, HbarSeries, NVARS};

/// `g ↦ Σ_α c_α(ħ) ∂^α g` in the coordinates of one chart.
#[derive(Clone, PartialEq)]
pub struct DifferentialOperator {
    chart: ChartKind,
    terms: BTreeMap<[u8; 4], HbarSeries>,
}

impl DifferentialOperator {
    pub fn new(chart: ChartKind) -> Self {
        DifferentialOperator { chart, terms: BTreeMap::new() }
    }

    pub fn chart(&self) -> ChartKind {
        self.chart
    }

    pub fn add_term(&mut self, alpha: [u8; 4], k: u32, c: CRat) {
        let slot = self.terms.entry(alpha).or_default();
        slot.add_term(k, c);
        if slot.is_zero() {
            self.terms.remove(&alpha);
        }
    }

    pub fn coefficient(&self, alpha: [u8; 4]) -> HbarSeries {
        self.terms.get(&alpha).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u8; 4], &HbarSeries)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn order(&self) -> u32 {
        self.terms
            .keys()
            .map(|a| a.iter().map(|&e| e as u32).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn max_hbar(&self) -> Option<u32> {
        self.terms.values().filter_map(|s| s.max_order()).max()
    }

    /// Only the ħ^`k` part.
    pub fn hbar_part(&self, k: u32) -> DifferentialOperator {
        let mut out = DifferentialOperator::new(self.chart);
        for (a, s) in &self.terms {
            out.add_term(*a, k, s.coeff(k));
        }
        out
    }

    pub fn sub(&self, o: &DifferentialOperator) -> DifferentialOperator {
        let mut out = self.clone();
        for (a, s) in &o.terms {
            for (k, c) in s.terms() {
                out.add_term(*a, *k, c.neg());
            }
        }
        out
    }

    pub fn conj(&self) -> DifferentialOperator {
        DifferentialOperator {
            chart: self.chart,
            terms: self.terms.iter().map(|(a, s)| (*a, s.conj())).collect(),
        }
    }

    /// Apply at a point, given the partial derivatives of the argument.
    pub fn apply(&self, point: &[f64; NVARS], hbar: f64, derivs: impl Fn([u8; 4]) -> Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(a, s)| s.eval(point, hbar) * derivs(*a))
            .sum()
    }

    fn ordered(&self) -> Vec<(&[u8; 4], &HbarSeries)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by_key(|(a, _)| (a.iter().map(|&e| e as u32).sum::<u32>(), Reverse(**a)));
        v
    }
}

fn derivative_text(alpha: &[u8; 4], names: &[&str; 4]) -> String {
    let parts: Vec<String> = alpha
        .iter()
        .zip(names)
        .filter(|(e, _)| **e > 0)
        .map(|(e, n)| if *e == 1 { format!("d{}", n) } else { format!("d{}^{}", n, e) })
        .collect();
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

impl fmt::Display for DifferentialOperator {
    /// One line per multi-index, lowest order first:
    /// `dL^2: (-1/4*H)*hbar^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = Chart::from_kind(self.chart).var_names();
        for (a, s) in self.ordered() {
            writeln!(f, "{}: {}", derivative_text(a, &names), s)?;
        }
        Ok(())
    }
}

impl fmt::Debug for DifferentialOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DifferentialOperator(\n{})", self)
    }
}
