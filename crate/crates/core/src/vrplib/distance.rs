use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Instance;
use crate::scalar::Scalar;

/// How Euclidean distances are post-processed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rounding {
    /// TSPLIB `nint`: `floor(d + 0.5)`.
    NearestInteger,
    None,
}

impl Rounding {
    /// Nearest-integer for EUC_2D files declared as TSP or CVRP, exact otherwise.
    pub fn default_for<S: Scalar>(inst: &Instance<S>) -> Self {
        let euc = inst.edge_weight_type.as_deref() == Some("EUC_2D");
        let ty = inst
            .declared_type
            .as_deref()
            .map(super::normalize_key)
            .unwrap_or_default();
        if euc && (ty == "TSP" || ty == "CVRP") {
            Rounding::NearestInteger
        } else {
            Rounding::None
        }
    }
}

impl std::str::FromStr for Rounding {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "int" | "nint" | "nearest" | "nearest-integer" => Ok(Rounding::NearestInteger),
            "none" | "exact" => Ok(Rounding::None),
            other => Err(format!("unknown rounding policy {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistanceError {
    #[error("no coordinates or explicit weights")]
    MissingGeometry,
    #[error("negative weight at ({from}, {to})")]
    NegativeWeight { from: usize, to: usize },
    #[error("explicit matrix is not {0}x{0}")]
    Shape(usize),
}

/// Dense `n x n` travel costs with 1-based access. Forbidden arcs hold
/// `S::infinity()`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<S = f64> {
    n: usize,
    values: Vec<S>,
    symmetric: bool,
    rounding: Rounding,
}

impl<S: Scalar> DistanceMatrix<S> {
    /// Builds from row-major values; the diagonal is zeroed.
    pub fn from_values(n: usize, mut values: Vec<S>, rounding: Rounding) -> Self {
        assert_eq!(values.len(), n * n, "matrix must be n x n");
        for i in 0..n {
            values[i * n + i] = S::zero();
        }
        let symmetric = (0..n).all(|i| (i + 1..n).all(|j| values[i * n + j] == values[j * n + i]));
        DistanceMatrix {
            n,
            values,
            symmetric,
            rounding,
        }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> S {
        self.values[(from - 1) * self.n + (to - 1)]
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn rounding(&self) -> Rounding {
        self.rounding
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn is_forbidden(&self, from: usize, to: usize) -> bool {
        self.get(from, to).is_infinite()
    }
}

fn euclid<S: Scalar>(a: [S; 2], b: [S; 2], rounding: Rounding) -> S {
    let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    match rounding {
        Rounding::NearestInteger => (d + S::lit(0.5)).floor(),
        Rounding::None => d,
    }
}

/// Materializes the cost matrix. Explicit weights take precedence over
/// coordinates and are copied verbatim (rounding does not touch them).
pub fn build_distance_matrix<S: Scalar>(
    inst: &Instance<S>,
    rounding: Rounding,
) -> Result<DistanceMatrix<S>, DistanceError> {
    let n = inst.dimension;
    let mut values = Vec::with_capacity(n * n);
    if let Some(w) = &inst.explicit_weights {
        if w.len() != n || w.iter().any(|r| r.len() != n) {
            return Err(DistanceError::Shape(n));
        }
        let forbidden = |i: usize, j: usize| {
            inst.forbidden_arcs
                .as_ref()
                .is_some_and(|f| f.contains(&(i, j)))
        };
        for (i, row) in w.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if i == j {
                    values.push(S::zero());
                } else if forbidden(i + 1, j + 1) {
                    values.push(S::infinity());
                } else if v < S::zero() {
                    return Err(DistanceError::NegativeWeight { from: i + 1, to: j + 1 });
                } else {
                    values.push(v);
                }
            }
        }
    } else if let Some(c) = &inst.coords {
        for a in c {
            for b in c {
                values.push(euclid(*a, *b, rounding));
            }
        }
        if let Some(f) = &inst.forbidden_arcs {
            for &(i, j) in f {
                if i != j {
                    values[(i - 1) * n + (j - 1)] = S::infinity();
                }
            }
        }
    } else {
        return Err(DistanceError::MissingGeometry);
    }
    Ok(DistanceMatrix::from_values(n, values, rounding))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vrplib::parse_instance;

    fn coords(pts: &[[f64; 2]]) -> Instance<f64> {
        let mut text = format!("DIMENSION : {}\nNODE_COORD_SECTION\n", pts.len());
        for (i, p) in pts.iter().enumerate() {
            text += &format!("{} {} {}\n", i + 1, p[0], p[1]);
        }
        parse_instance(&text).unwrap()
    }

    #[test]
    fn three_four_five() {
        let dm = build_distance_matrix(&coords(&[[0.0, 0.0], [3.0, 4.0]]), Rounding::None).unwrap();
        assert_eq!(dm.get(1, 2), 5.0);
        assert!(dm.is_symmetric());
    }

    #[test]
    fn nearest_integer() {
        let inst = coords(&[[0.0, 0.0], [1.0, 1.0]]);
        let dm = build_distance_matrix(&inst, Rounding::NearestInteger).unwrap();
        assert_eq!(dm.get(1, 2), 1.0);
    }

    #[test]
    fn asymmetric_flag() {
        let text = "DIMENSION : 2\nEDGE_WEIGHT_TYPE : EXPLICIT\nEDGE_WEIGHT_FORMAT : FULL_MATRIX\nEDGE_WEIGHT_SECTION\n0 7\n9 0\n";
        let inst: Instance = parse_instance(text).unwrap();
        let dm = build_distance_matrix(&inst, Rounding::None).unwrap();
        assert_eq!(dm.get(1, 2), 7.0);
        assert_eq!(dm.get(2, 1), 9.0);
        assert!(!dm.is_symmetric());
    }

    #[test]
    fn forbidden_arcs_are_infinite() {
        let text = "DIMENSION : 2\nEDGE_WEIGHT_TYPE : EXPLICIT\nEDGE_WEIGHT_SECTION\n0 4\n-1 0\n";
        let inst: Instance = parse_instance(text).unwrap();
        let dm = build_distance_matrix(&inst, Rounding::None).unwrap();
        assert!(dm.is_forbidden(2, 1));
        assert_eq!(dm.get(1, 2), 4.0);
    }

    #[test]
    fn negative_weight_rejected() {
        let mut inst = coords(&[[0.0, 0.0], [1.0, 0.0]]);
        inst.explicit_weights = Some(vec![vec![0.0, -3.0], vec![1.0, 0.0]]);
        assert_eq!(
            build_distance_matrix(&inst, Rounding::None).unwrap_err(),
            DistanceError::NegativeWeight { from: 1, to: 2 }
        );
    }

    #[test]
    fn default_rounding_policy() {
        let mut inst = coords(&[[0.0, 0.0]]);
        inst.edge_weight_type = Some("EUC_2D".into());
        assert_eq!(Rounding::default_for(&inst), Rounding::None);
        inst.declared_type = Some("CVRP".into());
        assert_eq!(Rounding::default_for(&inst), Rounding::NearestInteger);
        inst.declared_type = Some("VRPTW".into());
        assert_eq!(Rounding::default_for(&inst), Rounding::None);
    }
}
