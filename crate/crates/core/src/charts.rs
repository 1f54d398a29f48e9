//! Darboux charts on the four-dimensional phase space.
//!
//! Two charts are built in: Cartesian `(x, y, px, py)` and the
//! time-of-arrival chart `(T, chi, H, L)`. Both list coordinates in
//! Darboux block order (positions first, conjugate momenta second), so the
//! symplectic matrix is the same constant block matrix in either chart.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::symbolic::{rat, Expr, Ident, RatFun, Scalar, SymbolicError, Var, NVARS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChartError {
    #[error("point is at rest (px = py = 0); the time-of-arrival chart excludes it")]
    RestPoint,
    #[error("energy must be positive, got {0}")]
    NonPositiveEnergy(f64),
    #[error("mass and hbar must be positive (M = {m}, hbar = {hbar})")]
    InvalidParams { m: f64, hbar: f64 },
    #[error("unknown chart `{0}`")]
    UnknownChart(String),
    #[error("transported connection is not totally symmetric at {0:?}")]
    AsymmetricConnection([usize; 3]),
    #[error("transported connection still depends on auxiliary symbols")]
    NotRational,
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub m: f64,
    pub hbar: f64,
}

impl PhysParams {
    pub fn new(m: f64, hbar: f64) -> Result<Self, ChartError> {
        if m > 0.0 && hbar > 0.0 && m.is_finite() && hbar.is_finite() {
            Ok(PhysParams { m, hbar })
        } else {
            Err(ChartError::InvalidParams { m, hbar })
        }
    }

    pub fn natural() -> Self {
        PhysParams { m: 1.0, hbar: 1.0 }
    }
}

impl Default for PhysParams {
    fn default() -> Self {
        PhysParams::natural()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianPoint {
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionAnglePoint {
    pub t: f64,
    pub chi: f64,
    pub h: f64,
    pub l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub r: f64,
    pub phi: f64,
    pub p: f64,
    pub chi: f64,
}

impl CartesianPoint {
    pub fn new(x: f64, y: f64, px: f64, py: f64) -> Self {
        CartesianPoint { x, y, px, py }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.px, self.py]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        CartesianPoint::new(a[0], a[1], a[2], a[3])
    }
}

impl ActionAnglePoint {
    pub fn new(t: f64, chi: f64, h: f64, l: f64) -> Self {
        ActionAnglePoint { t, chi, h, l }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.t, self.chi, self.h, self.l]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        ActionAnglePoint::new(a[0], a[1], a[2], a[3])
    }
}

/// Map an angle into `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r >= 2.0 * PI {
        0.0
    } else {
        r
    }
}

pub fn to_action_angle(pt: &CartesianPoint, params: &PhysParams) -> Result<ActionAnglePoint, ChartError> {
    let p2 = pt.px * pt.px + pt.py * pt.py;
    if p2 == 0.0 {
        return Err(ChartError::RestPoint);
    }
    Ok(ActionAnglePoint {
        t: params.m * (pt.x * pt.px + pt.y * pt.py) / p2,
        chi: normalize_angle(pt.py.atan2(pt.px)),
        h: p2 / (2.0 * params.m),
        l: pt.x * pt.py - pt.y * pt.px,
    })
}

pub fn from_action_angle(pt: &ActionAnglePoint, params: &PhysParams) -> Result<CartesianPoint, ChartError> {
    if !(pt.h > 0.0) {
        return Err(ChartError::NonPositiveEnergy(pt.h));
    }
    let rho = (2.0 * params.m * pt.h).sqrt();
    let (s, c) = pt.chi.sin_cos();
    Ok(CartesianPoint {
        x: (2.0 * pt.h * pt.t * c + pt.l * s) / rho,
        y: (2.0 * pt.h * pt.t * s - pt.l * c) / rho,
        px: rho * c,
        py: rho * s,
    })
}

pub fn polar_from_cartesian(pt: &CartesianPoint) -> Result<PolarPoint, ChartError> {
    let p = pt.px.hypot(pt.py);
    if p == 0.0 {
        return Err(ChartError::RestPoint);
    }
    Ok(PolarPoint {
        r: pt.x.hypot(pt.y),
        phi: normalize_angle(pt.y.atan2(pt.x)),
        p,
        chi: normalize_angle(pt.py.atan2(pt.px)),
    })
}

pub fn cartesian_from_polar(pt: &PolarPoint) -> CartesianPoint {
    CartesianPoint {
        x: pt.r * pt.phi.cos(),
        y: pt.r * pt.phi.sin(),
        px: pt.p * pt.chi.cos(),
        py: pt.p * pt.chi.sin(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChartKind {
    Cartesian,
    ActionAngle,
}

/// Totally symmetric connection coefficients `γ_ijk`, stored once per
/// sorted index triple. Missing entries are zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConnectionTable {
    entries: BTreeMap<[usize; 3], RatFun>,
}

fn sorted(mut idx: [usize; 3]) -> [usize; 3] {
    idx.sort_unstable();
    idx
}

impl ConnectionTable {
    pub fn zero() -> Self {
        ConnectionTable::default()
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> RatFun {
        self.entries
            .get(&sorted([i, j, k]))
            .cloned()
            .unwrap_or_else(RatFun::zero)
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, value: RatFun) {
        let key = sorted([i, j, k]);
        if value.is_zero() {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, value);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Nonzero entries keyed by sorted zero-based index triples.
    pub fn nonzero(&self) -> impl Iterator<Item = (&[usize; 3], &RatFun)> {
        self.entries.iter()
    }
}

/// A Darboux chart with its exact forward gradients, inverse map and
/// transported connection.
#[derive(Debug, Clone)]
pub struct Chart {
    kind: ChartKind,
    connection: ConnectionTable,
    christoffel: Vec<RatFun>,
}

const CARTESIAN_VARS: [Var; 4] = [Var::X, Var::Y, Var::Px, Var::Py];
const ACTION_ANGLE_VARS: [Var; 4] = [Var::T, Var::Chi, Var::H, Var::L];

impl Chart {
    pub fn cartesian() -> Self {
        Chart {
            kind: ChartKind::Cartesian,
            connection: ConnectionTable::zero(),
            christoffel: vec![RatFun::zero(); 64],
        }
    }

    /// The transport is computed once per process and then shared.
    pub fn action_angle() -> Self {
        static BUILT: OnceLock<Chart> = OnceLock::new();
        BUILT.get_or_init(Chart::build_action_angle).clone()
    }

    fn build_action_angle() -> Self {
        let mut chart = Chart {
            kind: ChartKind::ActionAngle,
            connection: ConnectionTable::zero(),
            christoffel: Vec::new(),
        };
        chart.connection =
            transform_connection(&chart).expect("built-in chart has a rational connection");
        let w = chart.omega_inv();
        chart.christoffel = (0..64)
            .map(|n| {
                let (a, b, c) = (n / 16, (n / 4) % 4, n % 4);
                (0..4).fold(RatFun::zero(), |acc, m| {
                    if w[a][m] == 0 {
                        acc
                    } else {
                        acc.add(&chart.connection.get(m, b, c).scale(&rat(w[a][m] as i64, 1)))
                    }
                })
            })
            .collect();
        chart
    }

    pub fn from_kind(kind: ChartKind) -> Self {
        match kind {
            ChartKind::Cartesian => Chart::cartesian(),
            ChartKind::ActionAngle => Chart::action_angle(),
        }
    }

    pub fn by_name(name: &str) -> Result<Self, ChartError> {
        match name {
            "cartesian" => Ok(Chart::cartesian()),
            "action-angle" => Ok(Chart::action_angle()),
            other => Err(ChartError::UnknownChart(other.to_string())),
        }
    }

    pub fn kind(&self) -> ChartKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ChartKind::Cartesian => "cartesian",
            ChartKind::ActionAngle => "action-angle",
        }
    }

    pub fn dim(&self) -> usize {
        4
    }

    pub fn vars(&self) -> [Var; 4] {
        match self.kind {
            ChartKind::Cartesian => CARTESIAN_VARS,
            ChartKind::ActionAngle => ACTION_ANGLE_VARS,
        }
    }

    pub fn var_names(&self) -> [&'static str; 4] {
        let v = self.vars();
        [v[0].name(), v[1].name(), v[2].name(), v[3].name()]
    }

    pub fn idents(&self) -> [Ident; 4] {
        match self.kind {
            ChartKind::Cartesian => [Ident::X, Ident::Y, Ident::Px, Ident::Py],
            ChartKind::ActionAngle => [Ident::T, Ident::Chi, Ident::H, Ident::L],
        }
    }

    /// Lower-index symplectic matrix `ω_ij` in block form `[[0, 1], [-1, 0]]`.
    pub fn omega(&self) -> [[i32; 4]; 4] {
        [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]]
    }

    /// Inverse matrix `ω^ij`.
    pub fn omega_inv(&self) -> [[i32; 4]; 4] {
        [[0, 0, -1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0]]
    }

    pub fn connection(&self) -> &ConnectionTable {
        &self.connection
    }

    /// Exact gradients of the chart coordinates with respect to the
    /// Cartesian ones: `row a = ∂Q̃^a/∂(x, y, px, py)`.
    pub fn forward_gradients(&self) -> [[RatFun; 4]; 4] {
        let v = |x: Var| RatFun::var(x);
        let c = |n: i64| RatFun::from_int(n);
        match self.kind {
            ChartKind::Cartesian => std::array::from_fn(|a| {
                std::array::from_fn(|b| if a == b { c(1) } else { c(0) })
            }),
            ChartKind::ActionAngle => {
                let (x, y, px, py, m) = (v(Var::X), v(Var::Y), v(Var::Px), v(Var::Py), v(Var::M));
                let p2 = px.mul(&px).add(&py.mul(&py));
                let t = m
                    .mul(&x.mul(&px).add(&y.mul(&py)))
                    .div(&p2)
                    .expect("nonzero");
                let chi_px = py.neg().div(&p2).expect("nonzero");
                let chi_py = px.div(&p2).expect("nonzero");
                let h = p2.div(&m.scale(&rat(2, 1))).expect("nonzero");
                let l = x.mul(&py).sub(&y.mul(&px));
                [
                    [
                        t.derivative(Var::X),
                        t.derivative(Var::Y),
                        t.derivative(Var::Px),
                        t.derivative(Var::Py),
                    ],
                    [c(0), c(0), chi_px, chi_py],
                    [
                        c(0),
                        c(0),
                        h.derivative(Var::Px),
                        h.derivative(Var::Py),
                    ],
                    [
                        l.derivative(Var::X),
                        l.derivative(Var::Y),
                        l.derivative(Var::Px),
                        l.derivative(Var::Py),
                    ],
                ]
            }
        }
    }

    /// Cartesian coordinates as functions of this chart's coordinates. For
    /// the time-of-arrival chart the entries live in the extended ring with
    /// cos χ, sin χ and √(2MH) as auxiliary symbols.
    pub fn inverse_map(&self) -> [RatFun; 4] {
        match self.kind {
            ChartKind::Cartesian => CARTESIAN_VARS.map(RatFun::var),
            ChartKind::ActionAngle => {
                let v = RatFun::var;
                let (t, h, l, m) = (v(Var::T), v(Var::H), v(Var::L), v(Var::M));
                let (c, s, rho) = (v(Var::CosChi), v(Var::SinChi), v(Var::Root));
                // 1/ρ = ρ/(2MH)
                let inv_rho = rho
                    .div(&m.mul(&h).scale(&rat(2, 1)))
                    .expect("nonzero");
                let two_ht = h.mul(&t).scale(&rat(2, 1));
                [
                    two_ht.mul(&c).add(&l.mul(&s)).mul(&inv_rho),
                    two_ht.mul(&s).sub(&l.mul(&c)).mul(&inv_rho),
                    rho.mul(&c),
                    rho.mul(&s),
                ]
            }
        }
    }

    /// Chart coordinates of a Cartesian point.
    pub fn coords_of(&self, pt: &CartesianPoint, params: &PhysParams) -> Result<[f64; 4], ChartError> {
        match self.kind {
            ChartKind::Cartesian => Ok(pt.to_array()),
            ChartKind::ActionAngle => Ok(to_action_angle(pt, params)?.to_array()),
        }
    }

    pub fn cartesian_of(&self, coords: [f64; 4], params: &PhysParams) -> Result<CartesianPoint, ChartError> {
        match self.kind {
            ChartKind::Cartesian => Ok(CartesianPoint::from_array(coords)),
            ChartKind::ActionAngle => from_action_angle(&ActionAnglePoint::from_array(coords), params),
        }
    }

    /// Numeric point in the ring's variable layout, with M filled in.
    pub fn ring_point(&self, coords: [f64; 4], params: &PhysParams) -> [f64; NVARS] {
        let mut p = [0.0; NVARS];
        for (v, x) in self.vars().iter().zip(coords) {
            p[v.index()] = x;
        }
        p[Var::M.index()] = params.m;
        p
    }

    /// Mixed Christoffel symbols `Γ^a_bc = ω^am γ_mbc`.
    pub fn christoffel(&self, a: usize, b: usize, c: usize) -> &RatFun {
        &self.christoffel[a * 16 + b * 4 + c]
    }
}

impl fmt::Display for ConnectionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ([i, j, k], v) in &self.entries {
            writeln!(f, "gamma_{}{}{} = {}", i + 1, j + 1, k + 1, v)?;
        }
        Ok(())
    }
}

/// Transport the zero Cartesian connection to `target`:
/// `γ̃_ijk = ω_rd (∂Q^r/∂Q̃^i)(∂²Q^d/∂Q̃^j∂Q̃^k)`.
pub fn transform_connection(target: &Chart) -> Result<ConnectionTable, ChartError> {
    let q = target.inverse_map();
    let vars = target.vars();
    let omega = Chart::cartesian().omega();
    let first: Vec<Vec<RatFun>> = q
        .iter()
        .map(|qr| vars.iter().map(|&v| qr.derivative_ext(v)).collect())
        .collect();
    let second: Vec<Vec<Vec<RatFun>>> = first
        .iter()
        .map(|row| {
            row.iter()
                .map(|dq| vars.iter().map(|&v| dq.derivative_ext(v)).collect())
                .collect()
        })
        .collect();
    let mut full = vec![vec![vec![RatFun::zero(); 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                let mut acc = RatFun::zero();
                for r in 0..4 {
                    for d in 0..4 {
                        if omega[r][d] != 0 {
                            let t = first[r][i].mul(&second[d][j][k]);
                            acc = acc.add(&t.scale(&rat(omega[r][d] as i64, 1)));
                        }
                    }
                }
                let acc = acc.reduce_aux();
                if [Var::CosChi, Var::SinChi, Var::Root]
                    .iter()
                    .any(|&v| acc.contains_var(v))
                {
                    return Err(ChartError::NotRational);
                }
                full[i][j][k] = acc;
            }
        }
    }
    let mut table = ConnectionTable::zero();
    for i in 0..4 {
        for j in i..4 {
            for k in j..4 {
                let v = &full[i][j][k];
                for p in [[i, k, j], [j, i, k], [j, k, i], [k, i, j], [k, j, i]] {
                    if &full[p[0]][p[1]][p[2]] != v {
                        return Err(ChartError::AsymmetricConnection(p));
                    }
                }
                table.set(i, j, k, v.clone());
            }
        }
    }
    Ok(table)
}

/// Determinant of the forward-map Jacobian at a Cartesian point.
pub fn chart_jacobian_det(chart: &Chart, pt: &CartesianPoint, params: &PhysParams) -> Result<f64, ChartError> {
    let jac = exact_jacobian(chart, pt, params)?;
    Ok(det4(&jac))
}

pub fn exact_jacobian(chart: &Chart, pt: &CartesianPoint, params: &PhysParams) -> Result<[[f64; 4]; 4], ChartError> {
    if chart.kind == ChartKind::ActionAngle && pt.px == 0.0 && pt.py == 0.0 {
        return Err(ChartError::RestPoint);
    }
    let grads = chart.forward_gradients();
    let p = Chart::cartesian().ring_point(pt.to_array(), params);
    Ok(std::array::from_fn(|a| std::array::from_fn(|b| grads[a][b].eval(&p))))
}

/// Central-difference Jacobian of the forward map; angle differences are
/// unwrapped so the branch cut of χ does not leak in.
pub fn fd_jacobian(chart: &Chart, pt: &CartesianPoint, params: &PhysParams, step: f64) -> Result<[[f64; 4]; 4], ChartError> {
    let base = pt.to_array();
    let mut jac = [[0.0; 4]; 4];
    for b in 0..4 {
        let mut plus = base;
        let mut minus = base;
        plus[b] += step;
        minus[b] -= step;
        let fp = chart.coords_of(&CartesianPoint::from_array(plus), params)?;
        let fm = chart.coords_of(&CartesianPoint::from_array(minus), params)?;
        for a in 0..4 {
            let mut diff = fp[a] - fm[a];
            if chart.kind == ChartKind::ActionAngle && a == 1 {
                diff = (diff + PI).rem_euclid(2.0 * PI) - PI;
            }
            jac[a][b] = diff / (2.0 * step);
        }
    }
    Ok(jac)
}

pub fn det4(m: &[[f64; 4]; 4]) -> f64 {
    let mat = nalgebra::Matrix4::from_fn(|i, j| m[i][j]);
    mat.determinant()
}

/// Forward-mode dual number carrying a gradient over four seeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual4 {
    pub v: f64,
    pub d: [f64; 4],
}

impl Dual4 {
    pub fn constant(v: f64) -> Self {
        Dual4 { v, d: [0.0; 4] }
    }

    pub fn seed(v: f64, i: usize) -> Self {
        let mut d = [0.0; 4];
        d[i] = 1.0;
        Dual4 { v, d }
    }

    fn chain(self, v: f64, dv: f64) -> Self {
        Dual4 {
            v,
            d: self.d.map(|x| x * dv),
        }
    }

    pub fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r)
    }

    pub fn sin(self) -> Self {
        self.chain(self.v.sin(), self.v.cos())
    }

    pub fn cos(self) -> Self {
        self.chain(self.v.cos(), -self.v.sin())
    }

    /// `atan2(self, x)`, value normalized into `[0, 2π)`.
    pub fn atan2(self, x: Dual4) -> Self {
        let r2 = self.v * self.v + x.v * x.v;
        Dual4 {
            v: normalize_angle(self.v.atan2(x.v)),
            d: std::array::from_fn(|i| (x.v * self.d[i] - self.v * x.d[i]) / r2),
        }
    }
}

impl Add for Dual4 {
    type Output = Dual4;
    fn add(self, o: Dual4) -> Dual4 {
        Dual4 {
            v: self.v + o.v,
            d: std::array::from_fn(|i| self.d[i] + o.d[i]),
        }
    }
}

impl Sub for Dual4 {
    type Output = Dual4;
    fn sub(self, o: Dual4) -> Dual4 {
        Dual4 {
            v: self.v - o.v,
            d: std::array::from_fn(|i| self.d[i] - o.d[i]),
        }
    }
}

impl Mul for Dual4 {
    type Output = Dual4;
    fn mul(self, o: Dual4) -> Dual4 {
        Dual4 {
            v: self.v * o.v,
            d: std::array::from_fn(|i| self.d[i] * o.v + self.v * o.d[i]),
        }
    }
}

impl Div for Dual4 {
    type Output = Dual4;
    fn div(self, o: Dual4) -> Dual4 {
        let inv = 1.0 / o.v;
        Dual4 {
            v: self.v * inv,
            d: std::array::from_fn(|i| (self.d[i] - self.v * inv * o.d[i]) * inv),
        }
    }
}

impl Neg for Dual4 {
    type Output = Dual4;
    fn neg(self) -> Dual4 {
        Dual4 {
            v: -self.v,
            d: self.d.map(|x| -x),
        }
    }
}

impl Scalar for Dual4 {
    fn from_f64(v: f64) -> Self {
        Dual4::constant(v)
    }
    fn powi(&self, n: i32) -> Self {
        let r = self.v.powi(n);
        let dr = if n == 0 { 0.0 } else { n as f64 * self.v.powi(n - 1) };
        self.chain(r, dr)
    }
}

/// Values (with gradients over the chart coordinates) of every identifier
/// at a chart point. Identifiers of the other chart are derived through
/// the coordinate maps.
fn bind_all(chart: &Chart, coords: [f64; 4], params: &PhysParams, need_derived: bool) -> Result<[Option<Dual4>; 10], ChartError> {
    let seeds: [Dual4; 4] = std::array::from_fn(|i| Dual4::seed(coords[i], i));
    let m = Dual4::constant(params.m);
    let mut out: [Option<Dual4>; 10] = [None; 10];
    let slot = |id: Ident| Ident::ALL.iter().position(|&i| i == id).expect("listed");
    out[slot(Ident::M)] = Some(m);
    out[slot(Ident::Hbar)] = Some(Dual4::constant(params.hbar));
    let two = Dual4::constant(2.0);
    match chart.kind {
        ChartKind::Cartesian => {
            let [x, y, px, py] = seeds;
            out[slot(Ident::X)] = Some(x);
            out[slot(Ident::Y)] = Some(y);
            out[slot(Ident::Px)] = Some(px);
            out[slot(Ident::Py)] = Some(py);
            if need_derived {
                let p2 = px * px + py * py;
                if p2.v == 0.0 {
                    return Err(ChartError::RestPoint);
                }
                out[slot(Ident::T)] = Some(m * (x * px + y * py) / p2);
                out[slot(Ident::Chi)] = Some(py.atan2(px));
                out[slot(Ident::H)] = Some(p2 / (two * m));
                out[slot(Ident::L)] = Some(x * py - y * px);
            }
        }
        ChartKind::ActionAngle => {
            let [t, chi, h, l] = seeds;
            if !(h.v > 0.0) {
                return Err(ChartError::NonPositiveEnergy(h.v));
            }
            out[slot(Ident::T)] = Some(t);
            out[slot(Ident::Chi)] = Some(chi);
            out[slot(Ident::H)] = Some(h);
            out[slot(Ident::L)] = Some(l);
            if need_derived {
                let rho = (two * m * h).sqrt();
                let (c, s) = (chi.cos(), chi.sin());
                out[slot(Ident::X)] = Some((two * h * t * c + l * s) / rho);
                out[slot(Ident::Y)] = Some((two * h * t * s - l * c) / rho);
                out[slot(Ident::Px)] = Some(rho * c);
                out[slot(Ident::Py)] = Some(rho * s);
            }
        }
    }
    Ok(out)
}

/// Gradient of an observable with respect to the chart coordinates.
pub fn gradient(f: &Expr, coords: [f64; 4], chart: &Chart, params: &PhysParams) -> Result<Dual4, ChartError> {
    let own = chart.idents();
    let derived = Ident::ALL
        .iter()
        .any(|&i| i != Ident::M && i != Ident::Hbar && !own.contains(&i) && f.mentions(i));
    let binds = bind_all(chart, coords, params, derived)?;
    let lookup = |id: Ident| binds[Ident::ALL.iter().position(|&i| i == id).expect("listed")];
    Ok(f.eval_with(&lookup)?)
}

/// `Σ_q (∂f/∂q ∂g/∂p − ∂f/∂p ∂g/∂q)` over the chart's conjugate pairs.
pub fn poisson_bracket(f: &Expr, g: &Expr, coords: [f64; 4], chart: &Chart, params: &PhysParams) -> Result<f64, ChartError> {
    let df = gradient(f, coords, chart, params)?.d;
    let dg = gradient(g, coords, chart, params)?.d;
    Ok(df[0] * dg[2] - df[2] * dg[0] + df[1] * dg[3] - df[3] * dg[1])
}

/// Largest component of `∇_k ω_ij` for the chart's connection at a point.
pub fn omega_parallel_defect(chart: &Chart, coords: [f64; 4], params: &PhysParams) -> f64 {
    let p = chart.ring_point(coords, params);
    let w = chart.omega();
    let gam: Vec<f64> = (0..64)
        .map(|n| chart.christoffel(n / 16, (n / 4) % 4, n % 4).eval(&p))
        .collect();
    let g = |a: usize, b: usize, c: usize| gam[a * 16 + b * 4 + c];
    let mut worst: f64 = 0.0;
    for k in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                let mut s = 0.0;
                for l in 0..4 {
                    s -= g(l, k, i) * w[l][j] as f64 + g(l, k, j) * w[i][l] as f64;
                }
                worst = worst.max(s.abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse_observable;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn forward_map_examples() {
        let p = PhysParams::natural();
        let q = to_action_angle(&CartesianPoint::new(3.0, 4.0, 0.0, 2.0), &p).unwrap();
        assert!(close(q.t, 2.0, 1e-15) && close(q.chi, PI / 2.0, 1e-15));
        assert!(close(q.h, 2.0, 1e-15) && close(q.l, 6.0, 1e-15));
        let q = to_action_angle(&CartesianPoint::new(0.0, 0.0, 1.0, 0.0), &p).unwrap();
        assert_eq!(q, ActionAnglePoint::new(0.0, 0.0, 0.5, 0.0));
        assert_eq!(
            to_action_angle(&CartesianPoint::new(1.0, 1.0, 0.0, 0.0), &p),
            Err(ChartError::RestPoint)
        );
    }

    #[test]
    fn inverse_map_examples() {
        let p = PhysParams::natural();
        let c = from_action_angle(&ActionAnglePoint::new(2.0, PI / 2.0, 2.0, 6.0), &p).unwrap();
        assert!(close(c.x, 3.0, 1e-14) && close(c.y, 4.0, 1e-14));
        assert!(c.px.abs() < 1e-15 && close(c.py, 2.0, 1e-15));
        let c = from_action_angle(&ActionAnglePoint::new(0.0, 0.0, 0.5, 0.0), &p).unwrap();
        assert_eq!(c, CartesianPoint::new(0.0, 0.0, 1.0, 0.0));
        assert!(from_action_angle(&ActionAnglePoint::new(0.0, 0.0, 0.0, 0.0), &p).is_err());
    }

    #[test]
    fn cartesian_chart_is_flat_and_trivial() {
        let c = Chart::cartesian();
        assert!(c.connection().is_zero());
        let det = chart_jacobian_det(&c, &CartesianPoint::new(1.0, 2.0, 3.0, 4.0), &PhysParams::natural()).unwrap();
        assert_eq!(det, 1.0);
    }

    #[test]
    fn bracket_of_momentum_with_angular_momentum() {
        let px = parse_observable("px").unwrap();
        let l = parse_observable("x*py - y*px").unwrap();
        let v = poisson_bracket(&px, &l, [1.0, 2.0, 3.0, 4.0], &Chart::cartesian(), &PhysParams::natural()).unwrap();
        assert!(close(v, -4.0, 1e-15));
    }

    #[test]
    fn derived_identifiers_in_cartesian_context() {
        let t = parse_observable("T").unwrap();
        let h = parse_observable("H").unwrap();
        let v = poisson_bracket(&t, &h, [0.3, -1.2, 0.7, 1.9], &Chart::cartesian(), &PhysParams::new(1.7, 1.0).unwrap()).unwrap();
        assert!(close(v, 1.0, 1e-14));
        let err = poisson_bracket(&t, &h, [0.3, -1.2, 0.0, 0.0], &Chart::cartesian(), &PhysParams::natural());
        assert_eq!(err, Err(ChartError::RestPoint));
    }

    #[test]
    fn chart_names() {
        assert_eq!(Chart::by_name("action-angle").unwrap().kind(), ChartKind::ActionAngle);
        assert!(matches!(Chart::by_name("polar"), Err(ChartError::UnknownChart(_))));
    }
}
