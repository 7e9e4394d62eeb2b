//! Aggregated verification suite: spin-oracle cross-checks at small N plus
//! conservation, dissipativity, decoupling, parity, and propagator
//! cross-validation. Used by the command-line `verify` command and by the
//! acceptance tests.

use serde::Serialize;

use crate::generator::Generator;
use crate::model::{ModelKind, ModelSpec, SizeDefinition};
use crate::propagate::{evolve_expm, evolve_ode, uniform_grid};
use crate::spin::{build_liouvillian_spin, build_spin_rep, compare_with_generator, PhaseConvention};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn pass(name: impl Into<String>, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            passed: true,
            detail: detail.into(),
        }
    }

    fn fail(name: impl Into<String>, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            passed: false,
            detail: detail.into(),
        }
    }

    fn from_flag(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        if passed {
            CheckResult::pass(name, detail)
        } else {
            CheckResult::fail(name, detail)
        }
    }
}

fn all_specs(v1: f64, vi: f64, big_n: usize) -> Vec<ModelSpec> {
    vec![
        ModelSpec::model_a(SizeDefinition::DefI, v1, vi, big_n).unwrap(),
        ModelSpec::model_a(SizeDefinition::DefII, v1, vi, big_n).unwrap(),
        ModelSpec::model_b(SizeDefinition::DefI, v1, vi, big_n).unwrap(),
        ModelSpec::model_b(SizeDefinition::DefII, v1, vi, big_n).unwrap(),
    ]
}

fn spin_oracle_check(kind: ModelKind, definition: SizeDefinition, max_n: usize) -> CheckResult {
    let name = format!("spin-oracle/model-{kind}/def-{definition}");
    let mut worst_detail = String::from("all sizes matched");
    for big_n in 1..=max_n {
        for (v1, vi) in [(0.7, 1.3), (0.0, 1.0), (1.0, 0.0), (1.9, 0.6)] {
            let spec = match kind {
                ModelKind::A => ModelSpec::model_a(definition, v1, vi, big_n),
                ModelKind::B => ModelSpec::model_b(definition, v1, vi, big_n),
            }
            .expect("valid spec");
            let rep = match build_spin_rep(big_n, PhaseConvention::CondonShortley) {
                Ok(r) => r,
                Err(e) => return CheckResult::fail(name, format!("rep build failed: {e}")),
            };
            let spin_g = match build_liouvillian_spin(&spec, &rep) {
                Ok(m) => m,
                Err(e) => return CheckResult::fail(name, format!("spin build failed: {e}")),
            };
            let g = match Generator::assemble(&spec) {
                Ok(g) => g,
                Err(e) => return CheckResult::fail(name, format!("assembly failed: {e}")),
            };
            match compare_with_generator(&spin_g, &g) {
                Ok(cmp) if cmp.passed() => {
                    worst_detail = format!(
                        "N <= {max_n}: diag {:.1e}, bands {:.1e}, spectrum {:.1e}",
                        cmp.diag_max_abs, cmp.band_mag_max_abs, cmp.spectrum_max_dist
                    );
                }
                Ok(cmp) => {
                    return CheckResult::fail(
                        name,
                        format!("mismatch at N = {big_n}, v1 = {v1}, vi = {vi}: {cmp:?}"),
                    );
                }
                Err(e) => return CheckResult::fail(name, format!("comparison failed: {e}")),
            }
        }
    }
    CheckResult::pass(name, worst_detail)
}

fn conservation_check() -> CheckResult {
    let name = "generator/def-I-conservation";
    let mut worst = 0.0f64;
    for big_n in [2, 5, 40, 160] {
        for spec in all_specs(0.9, 1.4, big_n)
            .into_iter()
            .filter(|s| s.definition() == SizeDefinition::DefI)
        {
            let g = match Generator::assemble(&spec) {
                Ok(g) => g,
                Err(e) => return CheckResult::fail(name, format!("assembly failed: {e}")),
            };
            let tol_scale = g.max_abs_entry().max(1.0);
            for s in g.column_sums() {
                worst = worst.max(s.abs() / tol_scale);
            }
        }
    }
    CheckResult::from_flag(
        name,
        worst <= 1e-12,
        format!("max |column sum| / max |entry| = {worst:.2e}"),
    )
}

fn dissipativity_check() -> CheckResult {
    let name = "generator/def-II-dissipativity";
    let mut worst = f64::NEG_INFINITY;
    for big_n in [1, 5, 40, 160] {
        for spec in all_specs(0.9, 1.4, big_n)
            .into_iter()
            .filter(|s| s.definition() == SizeDefinition::DefII)
        {
            let g = match Generator::assemble(&spec) {
                Ok(g) => g,
                Err(e) => return CheckResult::fail(name, format!("assembly failed: {e}")),
            };
            let tol_scale = g.max_abs_entry().max(1.0);
            for s in g.column_sums() {
                worst = worst.max(s / tol_scale);
            }
        }
    }
    CheckResult::from_flag(
        name,
        worst <= 1e-12,
        format!("max column sum / max |entry| = {worst:.2e}"),
    )
}

fn identity_decoupling_check() -> CheckResult {
    let name = "generator/identity-sector-decoupled";
    for spec in all_specs(1.1, 0.8, 23) {
        let g = Generator::assemble(&spec).expect("assembly");
        let mut delta0 = vec![0.0; g.dim()];
        delta0[0] = 1.0;
        let flow = g.apply(&delta0).expect("apply");
        if flow.iter().any(|&x| x != 0.0) {
            return CheckResult::fail(name, format!("size-0 column leaks for {spec:?}"));
        }
    }
    CheckResult::pass(name, "size-0 column identically zero")
}

fn parity_check() -> CheckResult {
    let name = "propagation/model-B-parity";
    let cases = [
        ModelSpec::model_b(SizeDefinition::DefII, 0.8, 1.1, 31).unwrap(),
        ModelSpec::model_b(SizeDefinition::DefI, 0.0, 1.1, 31).unwrap(),
    ];
    let mut worst = 0.0f64;
    for spec in cases {
        let g = Generator::assemble(&spec).expect("assembly");
        let traj = match evolve_expm(&g, &uniform_grid(0.6, 7)) {
            Ok(t) => t,
            Err(e) => return CheckResult::fail(name, format!("propagation failed: {e}")),
        };
        for d in traj.distributions() {
            for n in (0..d.weights().len()).step_by(2) {
                worst = worst.max(d.weights()[n].abs());
            }
        }
    }
    CheckResult::from_flag(
        name,
        worst <= 1e-10,
        format!("max even-size weight = {worst:.2e}"),
    )
}

fn propagator_cross_check() -> CheckResult {
    let name = "propagation/expm-vs-ode";
    let mut worst = 0.0f64;
    for spec in all_specs(0.5, 1.0, 50) {
        let g = Generator::assemble(&spec).expect("assembly");
        let grid = uniform_grid(1.0, 6);
        let a = match evolve_expm(&g, &grid) {
            Ok(t) => t,
            Err(e) => return CheckResult::fail(name, format!("expm failed: {e}")),
        };
        let b = match evolve_ode(&g, &grid, 1e-10, 1e-12) {
            Ok(t) => t,
            Err(e) => return CheckResult::fail(name, format!("ode failed: {e}")),
        };
        for k in 0..grid.len() {
            let wa = a.distributions()[k].weights();
            let wb = b.distributions()[k].weights();
            for (x, y) in wa.iter().zip(wb) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    CheckResult::from_flag(
        name,
        worst <= 1e-8,
        format!("sup-norm propagator disagreement = {worst:.2e}"),
    )
}

/// Run the full verification suite; `max_spin_n` bounds the spin-oracle
/// system sizes (12 is the standard setting).
pub fn run_verification(max_spin_n: usize) -> Vec<CheckResult> {
    let mut results = Vec::new();
    for kind in [ModelKind::A, ModelKind::B] {
        for definition in [SizeDefinition::DefI, SizeDefinition::DefII] {
            results.push(spin_oracle_check(kind, definition, max_spin_n));
        }
    }
    results.push(conservation_check());
    results.push(dissipativity_check());
    results.push(identity_decoupling_check());
    results.push(parity_check());
    results.push(propagator_cross_check());
    results
}
