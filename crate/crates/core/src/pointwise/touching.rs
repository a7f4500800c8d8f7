use serde::Serialize;

use crate::config::Config;
use crate::error::{check_dim, Error, Result};
use crate::geometry::{Plane, SymmetricMultilinear, Vector};
use crate::measure::MeasureOracle;
use crate::verdict::{Status, Verdict};

/// Which second-order object the touching-ball bound is asserted for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondOrderKind {
    /// Second fundamental form of a C^2 submanifold.
    Smooth,
    /// pt D^2 B(a, T).
    Pointwise,
    /// ap D^2 A(a).
    Approximate,
}

#[derive(Debug, Clone)]
pub struct SecondOrder {
    pub kind: SecondOrderKind,
    pub plane: Plane,
    pub form: SymmetricMultilinear,
}

/// Basis vectors of the plane and all (t_i +- t_j) / sqrt 2.
pub fn tangent_net(plane: &Plane) -> Vec<Vector> {
    let b = plane.basis_vectors();
    let mut out = b.clone();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            out.push((&b[i] + &b[j]) * h);
            out.push((&b[i] - &b[j]) * h);
        }
    }
    out
}

/// U(a + r nu, r) misses the set, then D^2(v, v) . nu <= |v|^2 / r on the
/// tangent net.
pub fn touching_ball_check(oracle: &MeasureOracle, a: &Vector, nu: &Vector, r: f64, second: &SecondOrder, cfg: &Config) -> Result<Verdict> {
    let n = oracle.ambient_dim();
    check_dim(n, a.len())?;
    check_dim(n, nu.len())?;
    if second.form.order() != 2 {
        return Err(Error::InvalidParameter(format!("expected a bilinear form, got order {}", second.form.order())));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    if (nu.norm() - 1.0).abs() > 1e-9 {
        return Ok(Verdict::new(Status::PreconditionFailed).note("nu is not a unit vector"));
    }
    let centre = a + nu * r;
    let d = oracle.distance(&centre, 2.0 * r).value_or(2.0 * r);
    let mut v = Verdict::new(Status::Holds).value("ball_distance", d).value("radius", r);
    if d < r - cfg.emptiness_tol {
        v.status = Status::PreconditionFailed;
        v.push_note(format!("the open ball meets the set (distance {d:.6} < r)"));
        return Ok(v);
    }
    let mut worst = f64::NEG_INFINITY;
    for t in tangent_net(&second.plane) {
        let lhs = second.form.eval(&[&t, &t])?.dot(nu);
        let rhs = t.norm_squared() / r;
        worst = worst.max(lhs - rhs);
    }
    v.set_value("slack", -worst);
    if worst > cfg.touching_tol {
        v.status = Status::Fails;
        v.push_note(format!("{:?} bound violated by {worst:.3e}", second.kind));
    }
    Ok(v)
}
