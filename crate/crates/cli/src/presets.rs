//! Built-in experiments, selectable with `--preset <name>`.

use crate::config::{Budgets, ExperimentConfig, ModeSpec, SValue, ShapeSpec};

pub const PRESET_NAMES: &[&str] = &[
    "dichotomy-convergent",
    "dichotomy-divergent",
    "fan-kahane",
    "limsup-full",
    "cantor-1d",
    "cantor-2d",
    "cantor-strict",
    "dim-1d",
    "dim-upper",
    "falconer-scalar",
    "falconer-diagonal",
];

fn base(name: &str, shape: ShapeSpec) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        d: shape.exponents.as_ref().map_or(1, Vec::len),
        shape,
        s: None,
        s_policy: None,
        levels: 1,
        mode: ModeSpec::Relaxed,
        seed: 1,
        budgets: Budgets::default(),
        out: None,
        window: None,
        checkpoints: None,
        points: None,
        energy_s: None,
    }
}

fn one_dim(scale: f64, exponent: f64) -> ShapeSpec {
    ShapeSpec::power_law(vec![scale], vec![exponent])
}

/// Diagonal maps `diag(t, t^2)` for 20 geometrically spaced `t` in `[0.12, 0.9]`.
pub fn diagonal_family() -> Vec<Vec<f64>> {
    (0..20)
        .map(|i| {
            let t = 0.9 * 0.9f64.powi(i);
            vec![t, 0.0, 0.0, t * t]
        })
        .collect()
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let mut c = match name {
        "dichotomy-convergent" => {
            let mut c = base(name, one_dim(1.0, 2.0));
            c.window = Some([1_000, 10_000]);
            c.checkpoints = Some(vec![2_000, 5_000, 10_000]);
            c
        }
        "dichotomy-divergent" => {
            let mut c = base(name, one_dim(1.0, 1.0));
            c.window = Some([1_000, 100_000]);
            c.checkpoints = Some(vec![10_000, 100_000]);
            c
        }
        "fan-kahane" => {
            let mut c = base(name, one_dim(2.0, 1.0));
            c.window = Some([1, 100_000]);
            c.checkpoints = Some(vec![1_000, 10_000, 100_000]);
            c.points = Some(1_000);
            c
        }
        "limsup-full" => {
            let mut c = base(name, one_dim(1.0, 1.0));
            c.window = Some([1, 100_000]);
            c.checkpoints = Some(vec![1_000, 10_000, 100_000]);
            c.budgets.grid_j = 8;
            c
        }
        "cantor-1d" => {
            let mut c = base(name, one_dim(4.0, 2.0));
            c.s = Some(0.4);
            c.levels = 3;
            c.budgets.seeds = 100;
            c
        }
        "cantor-2d" => {
            let mut c = base(name, ShapeSpec::power_law(vec![1.0, 1.0], vec![0.6, 0.9]));
            c.s = Some(1.3);
            c.levels = 3;
            c.budgets.seeds = 100;
            c
        }
        "cantor-strict" => {
            let mut c = base(name, one_dim(0.25, 2.0));
            c.s = Some(0.05);
            c.levels = 3;
            c.mode = ModeSpec::Strict;
            c
        }
        "dim-1d" => {
            let mut c = base(name, one_dim(4.0, 2.0));
            c.s = Some(0.45);
            c.levels = 3;
            c.energy_s = Some(vec![SValue::Policy("0.8*s0".into())]);
            // Upper limit on seeds tried until one build completes.
            c.budgets.seeds = 200;
            c
        }
        "dim-upper" => {
            let mut c = base(name, one_dim(1.0, 2.0));
            c.s_policy = Some("s0+0.1".into());
            c
        }
        "falconer-scalar" => {
            let mut c = base(name, ShapeSpec::matrices(vec![vec![0.5]]));
            c.s = Some(0.5);
            c.budgets.mc_samples = 1_000_000;
            c
        }
        "falconer-diagonal" => {
            let mut c = base(name, ShapeSpec::matrices(diagonal_family()));
            c.d = 2;
            c.s = Some(1.5);
            c.budgets.mc_samples = 200_000;
            c
        }
        _ => return None,
    };
    c.name = name.to_string();
    Some(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_resolves_and_round_trips() {
        for name in PRESET_NAMES {
            let c = preset(name).unwrap();
            assert_eq!(&c.name, name);
            let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
            assert_eq!(back, c);
        }
        assert!(preset("nope").is_none());
    }
}
