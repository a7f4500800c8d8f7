//! Linear and polynomial geometry in R^n.

mod form;
mod graph;
mod jet;
mod plane;
mod region;
mod shear;

pub use form::{monomials, HomogeneousForm};
pub use graph::{distance_to_graph, vertical_vs_distance, GraphDistance, VerticalBounds};
pub use jet::{Jet, JetJson, SymmetricMultilinear};
pub use plane::Plane;
pub use region::{cone_contains, CarveSpec, Region};
pub use shear::ShearMap;

pub type Vector = nalgebra::DVector<f64>;

pub fn vector(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

/// Volume of the unit ball in R^m.
pub fn unit_ball_volume(m: usize) -> f64 {
    match m {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(m - 2) * 2.0 * std::f64::consts::PI / m as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
    }
}
