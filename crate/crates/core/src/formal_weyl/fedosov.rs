use std::collections::BTreeMap;

use super::element::{WeylElement, WeylKey};
use super::jet::JetCoeff;
use super::operator::DifferentialOperator;
use super::{TruncationConfig, WeylError};
use crate::charts::Chart;
use crate::symbolic::{rat, Expr, HbarSeries, RatFun, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectionMode {
    /// `∂a = da + (i/ħ)[Γ, a]`
    Symplectic,
    /// `Da = ∂a + (i/ħ)[ω_ij y^i dx^j, a]`
    Abelian,
}

/// `Γ = ½ γ_ijk y^i y^j dx^k`, summed over all ordered index triples.
fn gamma_element(chart: &Chart, trunc: TruncationConfig) -> WeylElement {
    let mut g = WeylElement::zero(chart.kind(), trunc);
    let table = chart.connection();
    if table.is_zero() {
        return g;
    }
    let half = rat(1, 2);
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                let c = table.get(i, j, k);
                if c.is_zero() {
                    continue;
                }
                let mut mu = [0u8; 4];
                mu[i] += 1;
                mu[j] += 1;
                g.add_term(WeylKey::new(0, mu, &[k]), JetCoeff::real(c.scale(&half)));
            }
        }
    }
    g
}

fn omega_element(chart: &Chart, trunc: TruncationConfig) -> WeylElement {
    let mut w = WeylElement::zero(chart.kind(), trunc);
    let omega = chart.omega();
    for i in 0..4 {
        for j in 0..4 {
            if omega[i][j] != 0 {
                let mut mu = [0u8; 4];
                mu[i] = 1;
                w.add_term(
                    WeylKey::new(0, mu, &[j]),
                    JetCoeff::real(RatFun::from_int(omega[i][j] as i64)),
                );
            }
        }
    }
    w
}

/// `(i/ħ)[b, a]` added into `out`; the commutator must be divisible by ħ.
fn add_i_over_hbar_commutator(
    out: &mut WeylElement,
    b: &WeylElement,
    a: &WeylElement,
    bound: u32,
) -> Result<(), WeylError> {
    let comm = b.commutator_within(a, bound)?;
    for (key, c) in comm.terms() {
        if key.k == 0 {
            return Err(WeylError::NegativeHbarPower);
        }
        out.add_term(WeylKey { k: key.k - 1, ..*key }, c.mul_i_pow(1));
    }
    Ok(())
}

pub fn apply_connection(a: &WeylElement, chart: &Chart, mode: ConnectionMode) -> Result<WeylElement, WeylError> {
    if a.chart() != chart.kind() {
        return Err(WeylError::ChartMismatch(a.chart(), chart.kind()));
    }
    let g = a.truncation().max_grade();
    let mut out = a.exterior_d();
    let wide = TruncationConfig::new(g + 2, 0).expect("zero hbar order always fits");
    let gamma = gamma_element(chart, wide);
    if !gamma.is_zero() {
        add_i_over_hbar_commutator(&mut out, &gamma, a, g + 2)?;
    }
    if mode == ConnectionMode::Abelian {
        add_i_over_hbar_commutator(&mut out, &omega_element(chart, wide), a, g + 1)?;
    }
    Ok(out)
}

/// Flat section with symbol `f`: the fixed point of `a = f + δ⁻¹∂a`.
///
/// `δ⁻¹∂` raises grade by exactly one, so the fixed point is assembled
/// grade by grade, `a₀ = f`, `a_{n+1} = δ⁻¹∂a_n`, until the bound.
pub fn sigma_inv_coeff(f: JetCoeff, chart: &Chart, trunc: TruncationConfig) -> Result<WeylElement, WeylError> {
    let mut a = WeylElement::scalar(chart.kind(), trunc, f);
    let mut inc = a.clone();
    for n in 1..=trunc.max_grade() + 1 {
        inc = apply_connection(&inc, chart, ConnectionMode::Symplectic)?.delta_inv();
        if inc.is_zero() {
            return Ok(a);
        }
        if inc.terms().any(|(k, _)| k.grade() != n) {
            return Err(WeylError::NonConvergence(trunc.max_grade()));
        }
        a = a.add(&inc)?;
    }
    Err(WeylError::NonConvergence(trunc.max_grade()))
}

fn chart_function(f: &Expr, chart: &Chart) -> Result<RatFun, WeylError> {
    let r = f.to_ratfun()?;
    let vars = chart.vars();
    let foreign = Var::ALL.into_iter().any(|v| v != Var::M && !vars.contains(&v) && r.contains_var(v));
    if foreign {
        return Err(WeylError::NotInChart(f.to_string()));
    }
    Ok(r)
}

pub fn sigma_inv(f: &Expr, chart: &Chart, trunc: TruncationConfig) -> Result<WeylElement, WeylError> {
    sigma_inv_coeff(JetCoeff::real(chart_function(f, chart)?), chart, trunc)
}

/// The symbol `σ(a)`: the `y`-free, form-free part as a series in ħ.
pub fn sigma(a: &WeylElement) -> Result<HbarSeries, WeylError> {
    let mut out = HbarSeries::zero();
    for (k, c) in a.symbol(u32::MAX) {
        if c.has_jets() {
            return Err(WeylError::NotLinear);
        }
        out.add_term(k, c.plain_part());
    }
    Ok(out)
}

fn check_closes(trunc: TruncationConfig) -> Result<(), WeylError> {
    TruncationConfig::new(trunc.max_grade(), trunc.max_hbar()).map(|_| ())
}

/// `f ⋆ g = σ(σ⁻¹f ∘ σ⁻¹g)` through ħ^K.
pub fn star_product(f: &Expr, g: &Expr, chart: &Chart, trunc: TruncationConfig) -> Result<HbarSeries, WeylError> {
    check_closes(trunc)?;
    let a = sigma_inv(f, chart, trunc)?;
    let b = sigma_inv(g, chart, trunc)?;
    let mut out = HbarSeries::zero();
    for (k, c) in a.sigma_of_product(&b, trunc.max_hbar())? {
        out.add_term(k, c.plain_part());
    }
    Ok(out)
}

fn operator_from(
    chart: &Chart,
    symbol: BTreeMap<u32, JetCoeff>,
) -> Result<DifferentialOperator, WeylError> {
    let mut op = DifferentialOperator::new(chart.kind());
    for (k, c) in symbol {
        for (jet, v) in c.terms() {
            let alpha = jet.ok_or(WeylError::NotLinear)?;
            op.add_term(alpha, k, v.clone());
        }
    }
    Ok(op)
}

fn star_operator(f: &Expr, chart: &Chart, trunc: TruncationConfig, left: bool) -> Result<DifferentialOperator, WeylError> {
    check_closes(trunc)?;
    let a = sigma_inv(f, chart, trunc)?;
    let g = sigma_inv_coeff(JetCoeff::generic(), chart, trunc)?;
    let symbol = if left {
        a.sigma_of_product(&g, trunc.max_hbar())?
    } else {
        g.sigma_of_product(&a, trunc.max_hbar())?
    };
    operator_from(chart, symbol)
}

/// `g ↦ f ⋆ g` as an explicit differential operator in the chart coordinates.
pub fn star_left_operator(f: &Expr, chart: &Chart, trunc: TruncationConfig) -> Result<DifferentialOperator, WeylError> {
    star_operator(f, chart, trunc, true)
}

/// `g ↦ g ⋆ f`.
pub fn star_right_operator(f: &Expr, chart: &Chart, trunc: TruncationConfig) -> Result<DifferentialOperator, WeylError> {
    star_operator(f, chart, trunc, false)
}
