//! Structured-text input schemas and their mapping onto core types.
//!
//! Three document shapes, all TOML:
//!
//! * a *distribution spec* — `kind` plus the parameters of that kind;
//! * an *instance spec* — either an explicit support-point list or two
//!   marginal distribution specs under an `independent = true` marker;
//! * a *pair spec* — two named distribution specs for the bound engine.
//!
//! Parsing is strict about values but not about formatting, and every spec
//! round-trips: parse, serialize, parse again is the identity on the parsed
//! form. Menus travel as CSV with a `q1,q2,s` header, one entry per record.

use revlab_core::{Dist1D, FiniteJoint, MenuEntry, MenuMechanism};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// One-good distribution document. `kind` selects the variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistSpec {
    /// Finite support: `values` and matching `probs`.
    Atoms { values: Vec<f64>, probs: Vec<f64> },
    /// Piecewise-constant density: `breaks` (cell edges) and `densities`.
    Piecewise { breaks: Vec<f64>, densities: Vec<f64> },
    Uniform { lo: f64, hi: f64 },
    Exponential { rate: f64 },
    /// Revenue `r` at every price up to `cap`, then an atom at `cap`.
    EqualRevenue { r: f64, cap: f64 },
}

impl DistSpec {
    pub fn build(&self) -> Result<Dist1D, CliError> {
        let d = match self {
            DistSpec::Atoms { values, probs } => {
                if values.len() != probs.len() {
                    return Err(CliError::Input(format!(
                        "{} values against {} probs",
                        values.len(),
                        probs.len()
                    )));
                }
                let pairs: Vec<(f64, f64)> =
                    values.iter().copied().zip(probs.iter().copied()).collect();
                Dist1D::finite_atoms(&pairs)
            }
            DistSpec::Piecewise { breaks, densities } => {
                Dist1D::piecewise_uniform(breaks, densities)
            }
            DistSpec::Uniform { lo, hi } => Dist1D::uniform(*lo, *hi),
            DistSpec::Exponential { rate } => Dist1D::exponential(*rate),
            DistSpec::EqualRevenue { r, cap } => Dist1D::equal_revenue(*r, *cap),
        };
        d.map_err(|e| CliError::Input(e.to_string()))
    }

    /// Finite version for LP work: atoms pass through, densities are
    /// discretized to `grid` equal-mass cells.
    pub fn build_finite(&self, grid: usize) -> Result<Dist1D, CliError> {
        let d = self.build()?;
        if d.as_finite().is_some() {
            Ok(d)
        } else {
            d.discretize(grid).map_err(|e| CliError::Input(e.to_string()))
        }
    }
}

/// One support point of an explicit two-good instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSpec {
    pub x1: f64,
    pub x2: f64,
    pub p: f64,
}

/// Two-good valuation instance: explicit points, or independent marginals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceSpec {
    Points {
        points: Vec<PointSpec>,
    },
    Independent {
        independent: bool,
        marginal1: DistSpec,
        marginal2: DistSpec,
    },
}

impl InstanceSpec {
    /// Build the finite joint; continuous marginals discretize to `grid`.
    pub fn build(&self, grid: usize) -> Result<FiniteJoint, CliError> {
        match self {
            InstanceSpec::Points { points } => {
                let pts: Vec<((f64, f64), f64)> =
                    points.iter().map(|p| ((p.x1, p.x2), p.p)).collect();
                FiniteJoint::from_points(&pts).map_err(|e| CliError::Input(e.to_string()))
            }
            InstanceSpec::Independent { independent, marginal1, marginal2 } => {
                if !independent {
                    return Err(CliError::Input(
                        "marginal form requires independent = true".into(),
                    ));
                }
                let d1 = marginal1.build_finite(grid)?;
                let d2 = marginal2.build_finite(grid)?;
                FiniteJoint::product(&d1, &d2).map_err(|e| CliError::Input(e.to_string()))
            }
        }
    }
}

/// Input of the bound engine: two independent goods by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSpec {
    pub good1: DistSpec,
    pub good2: DistSpec,
}

pub fn parse_toml<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Strip the sign off IEEE negative zero so CSV cells read plainly.
pub fn unsigned_zero(v: f64) -> f64 {
    v + 0.0
}

/// Menu CSV: header `q1,q2,s`, one entry per line.
pub fn menu_to_csv(menu: &MenuMechanism) -> String {
    let mut out = String::from("q1,q2,s\n");
    for e in menu.entries() {
        out.push_str(&format!(
            "{},{},{}\n",
            unsigned_zero(e.q1),
            unsigned_zero(e.q2),
            unsigned_zero(e.payment)
        ));
    }
    out
}

pub fn menu_from_csv(path: &std::path::Path) -> Result<MenuMechanism, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "q1,q2,s" => {}
        other => {
            return Err(CliError::Input(format!(
                "{}: expected header 'q1,q2,s', got {:?}",
                path.display(),
                other.unwrap_or("")
            )))
        }
    }
    let mut entries = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(CliError::Input(format!(
                "{} line {}: expected 3 fields, got {}",
                path.display(),
                i + 2,
                fields.len()
            )));
        }
        let num = |s: &str| -> Result<f64, CliError> {
            s.trim().parse().map_err(|e| {
                CliError::Input(format!("{} line {}: {e}", path.display(), i + 2))
            })
        };
        entries.push(MenuEntry { q1: num(fields[0])?, q2: num(fields[1])?, payment: num(fields[2])? });
    }
    MenuMechanism::new(entries).map_err(|e| CliError::Input(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip<T>(doc: &str)
    where
        T: serde::de::DeserializeOwned + Serialize + PartialEq + std::fmt::Debug,
    {
        let a: T = toml::from_str(doc).expect("first parse");
        let canon = toml::to_string(&a).expect("serialize");
        let b: T = toml::from_str(&canon).expect("second parse");
        assert_eq!(a, b, "canonical form drifted:\n{canon}");
    }

    #[test]
    fn dist_specs_round_trip() {
        roundtrip::<DistSpec>("kind = \"uniform\"\nlo = 0.0\nhi = 1.0\n");
        roundtrip::<DistSpec>("kind = \"exponential\"\nrate = 1.0\n");
        roundtrip::<DistSpec>("kind = \"equal_revenue\"\nr = 1.0\ncap = 10.0\n");
        roundtrip::<DistSpec>("kind = \"atoms\"\nvalues = [1.0, 2.0]\nprobs = [0.5, 0.5]\n");
        roundtrip::<DistSpec>(
            "kind = \"piecewise\"\nbreaks = [0.0, 1.0, 3.0]\ndensities = [0.8, 0.1]\n",
        );
    }

    #[test]
    fn instance_specs_round_trip() {
        roundtrip::<InstanceSpec>(
            "[[points]]\nx1 = 1.0\nx2 = 1.0\np = 0.5\n\n[[points]]\nx1 = 2.0\nx2 = 2.0\np = 0.5\n",
        );
        roundtrip::<InstanceSpec>(
            "independent = true\n\n[marginal1]\nkind = \"atoms\"\nvalues = [1.0, 2.0]\nprobs = [0.5, 0.5]\n\n[marginal2]\nkind = \"uniform\"\nlo = 0.0\nhi = 1.0\n",
        );
        roundtrip::<PairSpec>(
            "[good1]\nkind = \"uniform\"\nlo = 0.0\nhi = 1.0\n\n[good2]\nkind = \"exponential\"\nrate = 1.0\n",
        );
    }

    #[test]
    fn marginal_form_requires_marker() {
        let spec: InstanceSpec = toml::from_str(
            "independent = false\n\n[marginal1]\nkind = \"uniform\"\nlo = 0.0\nhi = 1.0\n\n[marginal2]\nkind = \"uniform\"\nlo = 0.0\nhi = 1.0\n",
        )
        .unwrap();
        assert!(spec.build(8).is_err());
    }

    #[test]
    fn continuous_marginals_discretize() {
        let spec: InstanceSpec = toml::from_str(
            "independent = true\n\n[marginal1]\nkind = \"uniform\"\nlo = 0.0\nhi = 1.0\n\n[marginal2]\nkind = \"uniform\"\nlo = 0.0\nhi = 1.0\n",
        )
        .unwrap();
        let joint = spec.build(6).unwrap();
        assert_eq!(joint.points().len(), 36);
    }

    #[test]
    fn menu_csv_round_trips() {
        let menu = MenuMechanism::new(vec![
            MenuEntry::NULL,
            MenuEntry { q1: 1.0, q2: 0.5, payment: 1.25 },
        ])
        .unwrap();
        let csv = menu_to_csv(&menu);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("menu.csv");
        std::fs::write(&path, &csv).unwrap();
        let back = menu_from_csv(&path).unwrap();
        assert_eq!(back.entries(), menu.entries());
    }
}
