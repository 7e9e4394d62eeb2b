//! Model parameter space and exact finite-N size-transition coefficients.
//!
//! Two Brownian-coupling models are supported:
//!
//! * **Model A**: system-bath hopping (rate `v1`) plus a three-system-fermion
//!   bath coupling (rate `v3`),
//! * **Model B**: system-bath hopping (rate `v1`) plus an intra-system
//!   four-fermion interaction (rate `v4`),
//!
//! each under two definitions of operator size:
//!
//! * **Definition I** counts system fermions in the full system+bath operator
//!   expansion (probability-conserving dynamics),
//! * **Definition II** counts fermions after the bath has been traced out
//!   (sub-stochastic dynamics; weight leaks into the bath).
//!
//! The dynamics of the size distribution P(n, t) is the linear master
//! equation dP(n)/dt = sum over offsets of C_dn(n) P(n + dn), where C_dn(n)
//! is the rate from size n+dn into size n. `coefficient` evaluates the exact
//! closed-form tables for any system size N >= 1. Polynomial factors are
//! evaluated in integer arithmetic and converted to floating point with a
//! single division by N^2 (Model A) or N^3 (Model B), so no cancellation
//! occurs even at large N.

use serde::Serialize;

use crate::error::{Error, Result};

/// Which Brownian model: A carries (v1, v3), B carries (v1, v4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModelKind {
    A,
    B,
}

/// Which operator-size definition.
///
/// `DefI` counts system fermions of the full system+bath evolution;
/// `DefII` counts fermions of the bath-traced (Lindblad) evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SizeDefinition {
    #[serde(rename = "I")]
    DefI,
    #[serde(rename = "II")]
    DefII,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::A => write!(f, "A"),
            ModelKind::B => write!(f, "B"),
        }
    }
}

impl std::fmt::Display for SizeDefinition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SizeDefinition::DefI => write!(f, "I"),
            SizeDefinition::DefII => write!(f, "II"),
        }
    }
}

/// A validated model specification.
///
/// Construction enforces the invariants: only the coupling matching `kind`
/// may be nonzero, all rates are finite and nonnegative, and `n_fermions >= 1`.
/// Rates are kept dimensional (units of inverse time); no normalization such
/// as `v3 = 1` is imposed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelSpec {
    kind: ModelKind,
    definition: SizeDefinition,
    v1: f64,
    v3: f64,
    v4: f64,
    n_fermions: usize,
}

impl ModelSpec {
    /// Model A with hopping rate `v1` and three-fermion bath coupling `v3`.
    pub fn model_a(
        definition: SizeDefinition,
        v1: f64,
        v3: f64,
        n_fermions: usize,
    ) -> Result<Self> {
        let spec = ModelSpec {
            kind: ModelKind::A,
            definition,
            v1,
            v3,
            v4: 0.0,
            n_fermions,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Model B with hopping rate `v1` and intra-system four-fermion rate `v4`.
    pub fn model_b(
        definition: SizeDefinition,
        v1: f64,
        v4: f64,
        n_fermions: usize,
    ) -> Result<Self> {
        let spec = ModelSpec {
            kind: ModelKind::B,
            definition,
            v1,
            v3: 0.0,
            v4,
            n_fermions,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// General constructor; returns an error if a rate is set for the wrong
    /// model (e.g. `v4 != 0` under Model A).
    pub fn new(
        kind: ModelKind,
        definition: SizeDefinition,
        v1: f64,
        v3: f64,
        v4: f64,
        n_fermions: usize,
    ) -> Result<Self> {
        let spec = ModelSpec {
            kind,
            definition,
            v1,
            v3,
            v4,
            n_fermions,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        for (name, rate) in [("v1", self.v1), ("v3", self.v3), ("v4", self.v4)] {
            if !rate.is_finite() || rate < 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "rate {name} = {rate} must be finite and nonnegative"
                )));
            }
        }
        match self.kind {
            ModelKind::A if self.v4 != 0.0 => {
                return Err(Error::InvalidSpec(
                    "Model A carries (v1, v3); v4 must be zero".into(),
                ));
            }
            ModelKind::B if self.v3 != 0.0 => {
                return Err(Error::InvalidSpec(
                    "Model B carries (v1, v4); v3 must be zero".into(),
                ));
            }
            _ => {}
        }
        if self.n_fermions < 1 {
            return Err(Error::InvalidSpec("n_fermions must be >= 1".into()));
        }
        Ok(())
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn definition(&self) -> SizeDefinition {
        self.definition
    }

    pub fn v1(&self) -> f64 {
        self.v1
    }

    pub fn v3(&self) -> f64 {
        self.v3
    }

    pub fn v4(&self) -> f64 {
        self.v4
    }

    /// The interaction rate matching the model kind (`v3` for A, `v4` for B).
    pub fn interaction_rate(&self) -> f64 {
        match self.kind {
            ModelKind::A => self.v3,
            ModelKind::B => self.v4,
        }
    }

    /// Largest coupling rate; sets the natural time scale 1/max_rate.
    pub fn max_rate(&self) -> f64 {
        self.v1.max(self.v3).max(self.v4)
    }

    pub fn n_fermions(&self) -> usize {
        self.n_fermions
    }

    /// Same spec under the other size definition.
    pub fn with_definition(&self, definition: SizeDefinition) -> Self {
        ModelSpec { definition, ..*self }
    }

    /// Supported transition offsets dn of the coefficient table, sorted.
    pub fn supported_offsets(&self) -> &'static [i64] {
        supported_offsets(self.kind, self.definition)
    }

    /// Exact transition rate C_dn(n) from size n+dn into size n.
    ///
    /// Returns 0 for offsets outside the model's table and whenever the
    /// source size n+dn falls outside [0, N], so generator assembly needs no
    /// boundary special-casing. Pure and deterministic.
    ///
    /// # Panics
    /// Panics if `n > N` (caller contract: 0 <= n <= N).
    pub fn coefficient(&self, n: usize, delta_n: i64) -> f64 {
        let big_n = self.n_fermions;
        assert!(n <= big_n, "size index n = {n} out of range 0..={big_n}");
        if !self.supported_offsets().contains(&delta_n) {
            return 0.0;
        }
        let source = n as i64 + delta_n;
        if source < 0 || source > big_n as i64 {
            return 0.0;
        }
        raw_coefficient(
            self.kind,
            self.definition,
            self.v1,
            self.interaction_rate(),
            big_n as i128,
            n as i128,
            delta_n,
        )
    }

    /// Closed-form t = 0 slope of the mean size for the initial condition
    /// delta_{n,1}.
    ///
    /// Model A / Def I:  -4 v1 + 4 v3 (N-1)(N-2) / N^2.
    /// Model B (both):   -4 v1 + 8 v4 (N-1)(N-2)(N-3) / N^3.
    /// Model A / Def II: the n = 1 diagonal rate C_0(1), since sizes do not
    /// couple (this equals -4 v1 - 4 v3 (N-1)(N-2)/N^2, approaching
    /// -4 (v1 + v3) as N grows).
    pub fn initial_slope(&self) -> f64 {
        let n = self.n_fermions as i128;
        match (self.kind, self.definition) {
            (ModelKind::A, SizeDefinition::DefI) => {
                -4.0 * self.v1 + self.v3 * int_ratio(4 * (n - 1) * (n - 2), n * n)
            }
            (ModelKind::A, SizeDefinition::DefII) => self.coefficient(1, 0),
            (ModelKind::B, _) => {
                -4.0 * self.v1
                    + self.v4 * int_ratio(8 * (n - 1) * (n - 2) * (n - 3), n * n * n)
            }
        }
    }

    /// Coupling ratio v1 / v_interaction at which the initial slope vanishes,
    /// or `None` when the slope has a fixed sign (Model A under Definition II
    /// decays for any positive rates).
    pub fn critical_ratio(&self) -> Option<f64> {
        let n = self.n_fermions as i128;
        match (self.kind, self.definition) {
            (ModelKind::A, SizeDefinition::DefI) => {
                Some(int_ratio((n - 1) * (n - 2), n * n))
            }
            (ModelKind::A, SizeDefinition::DefII) => None,
            (ModelKind::B, _) => Some(int_ratio(2 * (n - 1) * (n - 2) * (n - 3), n * n * n)),
        }
    }
}

/// Supported offsets per (model, definition); sorted ascending.
pub fn supported_offsets(kind: ModelKind, definition: SizeDefinition) -> &'static [i64] {
    match (kind, definition) {
        (ModelKind::A, SizeDefinition::DefI) => &[-1, 0, 1, 3],
        (ModelKind::A, SizeDefinition::DefII) => &[0],
        (ModelKind::B, SizeDefinition::DefI) => &[-2, 0, 1, 2],
        (ModelKind::B, SizeDefinition::DefII) => &[-2, 0, 2],
    }
}

fn int_ratio(num: i128, den: i128) -> f64 {
    num as f64 / den as f64
}

/// Literal table formulas, without the offset/range clamping.
///
/// Exposed crate-internally so tests can check that the boundary factors
/// (n - N - 1), (n - N), ... vanish identically where injection from outside
/// [0, N] would otherwise occur.
pub(crate) fn raw_coefficient(
    kind: ModelKind,
    definition: SizeDefinition,
    v1: f64,
    v_int: f64,
    big_n: i128,
    n: i128,
    delta_n: i64,
) -> f64 {
    let nn = big_n * big_n;
    match kind {
        ModelKind::A => match delta_n {
            0 => {
                let poly = n * (2 + 4 * n * n - 3 * big_n - 6 * n * big_n + 3 * nn);
                -4.0 * v1 * n as f64 - v_int * int_ratio(4 * poly, 3 * nn)
            }
            1 => match definition {
                SizeDefinition::DefI => 4.0 * v1 * (n + 1) as f64,
                SizeDefinition::DefII => 0.0,
            },
            -1 => v_int * int_ratio(4 * (n - 1) * (n - big_n - 1) * (n - big_n), nn),
            3 => v_int * int_ratio(4 * (n + 3) * (n + 2) * (n + 1), 3 * nn),
            _ => 0.0,
        },
        ModelKind::B => {
            let nnn = nn * big_n;
            match delta_n {
                0 => {
                    let poly =
                        n * (n - big_n) * (2 * (2 + n * n) - (3 + 2 * n) * big_n + nn);
                    -4.0 * v1 * n as f64 + v_int * int_ratio(4 * poly, nnn)
                }
                1 => match definition {
                    SizeDefinition::DefI => 4.0 * v1 * (n + 1) as f64,
                    SizeDefinition::DefII => 0.0,
                },
                2 => {
                    let poly = n * (n + 1) * (n + 2) * (2 + n - big_n);
                    -v_int * int_ratio(4 * poly, nnn)
                }
                -2 => {
                    let poly = (n - 2) * (n - 2 - big_n) * (n - 1 - big_n) * (n - big_n);
                    -v_int * int_ratio(4 * poly, nnn)
                }
                _ => 0.0,
            }
        }
    }
}

/// Dense tabulation of the coefficient table of a spec: one value vector per
/// supported offset, indexed by the target size n (entries clamped to zero
/// where the source size n+dn leaves [0, N]).
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    offsets: Vec<i64>,
    values: Vec<Vec<f64>>,
    n_fermions: usize,
}

impl CoefficientTable {
    pub fn build(spec: &ModelSpec) -> Self {
        let big_n = spec.n_fermions();
        let offsets: Vec<i64> = spec.supported_offsets().to_vec();
        let values = offsets
            .iter()
            .map(|&dn| (0..=big_n).map(|n| spec.coefficient(n, dn)).collect())
            .collect();
        CoefficientTable {
            offsets,
            values,
            n_fermions: big_n,
        }
    }

    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    pub fn n_fermions(&self) -> usize {
        self.n_fermions
    }

    /// C_dn(n), zero for unsupported offsets.
    pub fn get(&self, n: usize, delta_n: i64) -> f64 {
        match self.offsets.iter().position(|&o| o == delta_n) {
            Some(k) => self.values[k][n],
            None => 0.0,
        }
    }

    /// Per-offset band view (values indexed by target size n).
    pub fn band(&self, delta_n: i64) -> Option<&[f64]> {
        self.offsets
            .iter()
            .position(|&o| o == delta_n)
            .map(|k| self.values[k].as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn spec_a1(v1: f64, v3: f64, n: usize) -> ModelSpec {
        ModelSpec::model_a(SizeDefinition::DefI, v1, v3, n).unwrap()
    }

    #[test]
    fn hopping_coefficient_at_origin() {
        let spec = spec_a1(1.0, 0.0, 8);
        assert_eq!(spec.coefficient(0, 1), 4.0);
    }

    #[test]
    fn model_a_growth_band_vanishes_at_n1() {
        for (v1, v3) in [(1.0, 1.0), (0.3, 2.7), (0.0, 5.0)] {
            let spec = spec_a1(v1, v3, 10);
            assert_eq!(spec.coefficient(1, -1), 0.0, "factor (n-1) at n=1");
        }
    }

    #[test]
    fn model_a_shrink_band_hand_value() {
        // (4 v3 / N^2)(n-1)(n-N-1)(n-N) at v3=1, N=4, n=2: (4/16)(1)(-3)(-2) = 1.5
        let spec = spec_a1(0.0, 1.0, 4);
        assert_eq!(spec.coefficient(2, -1), 1.5);
    }

    #[test]
    fn model_b_raise_band_vanishes_at_edge() {
        let spec = ModelSpec::model_b(SizeDefinition::DefII, 0.0, 1.0, 4).unwrap();
        assert_eq!(spec.coefficient(2, 2), 0.0, "factor (2+n-N) at n=N-2");
    }

    #[test]
    fn out_of_range_and_unsupported_offsets_are_zero() {
        let spec = spec_a1(1.0, 1.0, 5);
        assert_eq!(spec.coefficient(5, 1), 0.0, "source n+1 beyond N");
        assert_eq!(spec.coefficient(0, -1), 0.0, "source below 0");
        assert_eq!(spec.coefficient(2, 2), 0.0, "offset not in Model A table");
        assert_eq!(spec.coefficient(2, -7), 0.0);
    }

    #[test]
    fn boundary_factors_vanish_outside_range() {
        // Formula values at hypothetical sizes just outside [0, N] are
        // identically zero, so the range clamp never discards weight.
        let n = 9_i128;
        let c = |nn, dn| {
            raw_coefficient(ModelKind::A, SizeDefinition::DefI, 1.3, 0.7, n, nn, dn)
        };
        assert_eq!(c(n + 1, -1), 0.0);
        assert_eq!(c(n, -1) * 0.0, 0.0);
        let cb = |nn, dn| {
            raw_coefficient(ModelKind::B, SizeDefinition::DefI, 1.3, 0.7, n, nn, dn)
        };
        assert_eq!(cb(n + 1, -2), 0.0);
        assert_eq!(cb(n + 2, -2), 0.0);
    }

    #[test]
    fn off_diagonals_nonnegative_diagonal_nonpositive_exhaustive() {
        let couplings = [(1.0, 0.0), (0.0, 1.0), (0.5, 1.5), (3.0, 0.25)];
        for big_n in 1..=200usize {
            for &(v1, vi) in &couplings {
                let specs = [
                    ModelSpec::model_a(SizeDefinition::DefI, v1, vi, big_n).unwrap(),
                    ModelSpec::model_a(SizeDefinition::DefII, v1, vi, big_n).unwrap(),
                    ModelSpec::model_b(SizeDefinition::DefI, v1, vi, big_n).unwrap(),
                    ModelSpec::model_b(SizeDefinition::DefII, v1, vi, big_n).unwrap(),
                ];
                for spec in specs {
                    for n in 0..=big_n {
                        for &dn in spec.supported_offsets() {
                            let c = spec.coefficient(n, dn);
                            if dn == 0 {
                                assert!(
                                    c <= 0.0,
                                    "C_0({n}) = {c} > 0 for {spec:?}"
                                );
                            } else {
                                assert!(
                                    c >= 0.0,
                                    "C_{dn}({n}) = {c} < 0 for {spec:?}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn model_b_definitions_share_all_even_offsets() {
        for big_n in [1, 2, 3, 7, 40] {
            let d1 = ModelSpec::model_b(SizeDefinition::DefI, 0.8, 1.7, big_n).unwrap();
            let d2 = ModelSpec::model_b(SizeDefinition::DefII, 0.8, 1.7, big_n).unwrap();
            for n in 0..=big_n {
                for dn in [-2i64, 0, 2] {
                    assert_eq!(d1.coefficient(n, dn), d2.coefficient(n, dn));
                }
                assert_eq!(d2.coefficient(n, 1), 0.0);
            }
        }
    }

    #[test]
    fn initial_slope_model_a_closed_form() {
        let spec = spec_a1(0.0, 1.0, 100);
        assert_relative_eq!(spec.initial_slope(), 3.8808, max_relative = 1e-15);

        let spec = spec_a1(1.0, 1.0, 4);
        assert_relative_eq!(spec.initial_slope(), -2.5, max_relative = 1e-15);
    }

    #[test]
    fn initial_slope_model_b_transition_point_limit() {
        // v1 = 2 v4 sits exactly at the infinite-N transition; the finite-N
        // slope approaches 0 from below as N grows.
        let mut last = f64::INFINITY;
        for big_n in [10, 100, 1_000, 10_000] {
            let spec = ModelSpec::model_b(SizeDefinition::DefI, 2.0, 1.0, big_n).unwrap();
            let slope = spec.initial_slope();
            assert!(slope < 0.0);
            assert!(slope.abs() < last);
            last = slope.abs();
        }
        assert!(last < 5e-3);
    }

    #[test]
    fn initial_slope_matches_between_b_definitions() {
        for big_n in [3, 10, 57] {
            let d1 = ModelSpec::model_b(SizeDefinition::DefI, 0.9, 1.2, big_n).unwrap();
            let d2 = ModelSpec::model_b(SizeDefinition::DefII, 0.9, 1.2, big_n).unwrap();
            assert_eq!(d1.initial_slope(), d2.initial_slope());
        }
    }

    #[test]
    fn model_a_def_ii_slope_is_diagonal_rate() {
        let spec = ModelSpec::model_a(SizeDefinition::DefII, 0.4, 1.1, 25).unwrap();
        let expected = -4.0 * 0.4 - 4.0 * 1.1 * (24.0 * 23.0) / 625.0;
        assert_relative_eq!(spec.initial_slope(), expected, max_relative = 1e-14);
        assert!(spec.initial_slope() < 0.0);
    }

    #[test]
    fn critical_ratios() {
        assert_abs_diff_eq!(
            spec_a1(1.0, 1.0, 3).critical_ratio().unwrap(),
            2.0 / 9.0,
            epsilon = 1e-16
        );
        // Large-N limits: 1 for Model A, 2 for Model B.
        let a = spec_a1(1.0, 1.0, 1_000_000).critical_ratio().unwrap();
        assert!((a - 1.0).abs() < 5e-6);
        let b = ModelSpec::model_b(SizeDefinition::DefI, 1.0, 1.0, 1_000_000)
            .unwrap()
            .critical_ratio()
            .unwrap();
        assert!((b - 2.0).abs() < 2e-5);
        assert!(ModelSpec::model_a(SizeDefinition::DefII, 1.0, 1.0, 50)
            .unwrap()
            .critical_ratio()
            .is_none());
    }

    #[test]
    fn spec_validation_rejects_bad_input() {
        assert!(ModelSpec::model_a(SizeDefinition::DefI, -1.0, 1.0, 5).is_err());
        assert!(ModelSpec::model_a(SizeDefinition::DefI, f64::NAN, 1.0, 5).is_err());
        assert!(ModelSpec::model_a(SizeDefinition::DefI, 1.0, 1.0, 0).is_err());
        assert!(ModelSpec::new(ModelKind::A, SizeDefinition::DefI, 1.0, 0.0, 0.5, 5).is_err());
        assert!(ModelSpec::new(ModelKind::B, SizeDefinition::DefI, 1.0, 0.5, 0.0, 5).is_err());
        assert!(ModelSpec::new(ModelKind::B, SizeDefinition::DefII, 1.0, 0.0, 2.0, 5).is_ok());
    }

    #[test]
    fn coefficient_table_matches_spec() {
        let spec = ModelSpec::model_b(SizeDefinition::DefI, 0.3, 1.4, 12).unwrap();
        let table = CoefficientTable::build(&spec);
        assert_eq!(table.offsets(), &[-2, 0, 1, 2]);
        for n in 0..=12 {
            for dn in [-2i64, -1, 0, 1, 2, 3] {
                assert_eq!(table.get(n, dn), spec.coefficient(n, dn));
            }
        }
        assert!(table.band(1).is_some());
        assert!(table.band(3).is_none());
    }
}
