//! Electrostatics of printhead arrays above a grounded substrate.
//!
//! Every spike tip carries a regularized point charge `q_i`; the grounded
//! plane z = 0 is represented by image charges `-q_i` mirrored through it.
//! Charges are fixed by requiring the potential on each tip's
//! regularization sphere (radius `a_i`) to equal the applied voltage:
//!
//! ```text
//! Σ_j P_ij q_j = V,   P_ii = k (1/a_i − 1/(2 z_i)),
//!                     P_ij = k (1/|p_i − p_j| − 1/|p_i − p̄_j|)
//! ```
//!
//! with `k = 1/(4πε₀)`. By the mean-value property of harmonic functions the
//! other charges' contribution averaged over the sphere equals its value at
//! the center, so the condition holds exactly for the sphere-averaged
//! potential and pointwise up to O(a·E_external).

use nalgebra::{DMatrix, DVector, Vector3};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::geometry::{ArrayLayout, ProcessConditions, Tip};

/// Relative residual the charge solve must reach.
pub const SOLVER_RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Default cone-jet activity threshold on the interference ratio.
pub const DEFAULT_ACTIVITY_THRESHOLD: f64 = 0.8;

/// Solved tip charges for an array; evaluates potential and field anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSolution {
    tips: Vec<Tip>,
    head_of_tip: Vec<usize>,
    radii: Vec<f64>,
    charges: Vec<f64>,
    applied_voltage: f64,
    coulomb: f64,
    residual: f64,
}

/// Geometric potential-coefficient matrix (units 1/m; multiply by 1/(4πε₀)).
/// Symmetric by construction of the image kernel.
pub fn potential_coefficients(points: &[Vector3<f64>], radii: &[f64]) -> DMatrix<f64> {
    let n = points.len();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0 / radii[i] - 1.0 / (2.0 * points[i].z)
        } else {
            image_kernel(&points[i], &points[j])
        }
    })
}

#[inline]
fn mirror(p: &Vector3<f64>) -> Vector3<f64> {
    Vector3::new(p.x, p.y, -p.z)
}

/// 1/|x − p| − 1/|x − p̄|
#[inline]
fn image_kernel(x: &Vector3<f64>, p: &Vector3<f64>) -> f64 {
    1.0 / (x - p).norm() - 1.0 / (x - mirror(p)).norm()
}

fn check_geometry(tips: &[Tip], radii: &[f64]) -> Result<()> {
    for (t, &a) in tips.iter().zip(radii) {
        if !(t.position.z > 0.0) {
            return Err(Error::Domain(format!(
                "tip at z = {:e} m is not above the grounded plane",
                t.position.z
            )));
        }
        if t.position.z < 10.0 * a {
            return Err(Error::Domain(format!(
                "tip at z = {:e} m is closer to the plane than 10 regularization radii ({:e} m)",
                t.position.z,
                10.0 * a
            )));
        }
    }
    for i in 0..tips.len() {
        for j in i + 1..tips.len() {
            let r = (tips[i].position - tips[j].position).norm();
            if r < radii[i] + radii[j] {
                return Err(Error::Geometry(format!(
                    "tips {i} and {j} are {r:e} m apart, closer than their regularization spheres ({:e} m)",
                    radii[i] + radii[j]
                )));
            }
        }
    }
    Ok(())
}

fn relative_residual(a: &DMatrix<f64>, x: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a * x - b).norm() / b.norm()
}

/// Solves the image-charge system for every tip of every head.
pub fn solve_tip_charges(
    layout: &ArrayLayout,
    conditions: &ProcessConditions,
    constants: &PhysicalConstants,
) -> Result<FieldSolution> {
    layout.validate()?;
    conditions.validate()?;
    let mut tips = Vec::with_capacity(layout.tip_count());
    let mut head_of_tip = Vec::with_capacity(layout.tip_count());
    let mut radii = Vec::with_capacity(layout.tip_count());
    for (h, head) in layout.heads.iter().enumerate() {
        for t in head.tips() {
            tips.push(t);
            head_of_tip.push(h);
            radii.push(head.tip_regularization_radius);
        }
    }
    solve_for_tips(tips, head_of_tip, radii, conditions.applied_voltage, constants)
}

pub(crate) fn solve_for_tips(
    tips: Vec<Tip>,
    head_of_tip: Vec<usize>,
    radii: Vec<f64>,
    applied_voltage: f64,
    constants: &PhysicalConstants,
) -> Result<FieldSolution> {
    check_geometry(&tips, &radii)?;
    let points: Vec<_> = tips.iter().map(|t| t.position).collect();
    let p = potential_coefficients(&points, &radii);
    let coulomb = constants.coulomb_constant();
    // Solve P x = V with x = k q; k is folded back in afterwards.
    let b = DVector::from_element(points.len(), applied_voltage);
    let mut x = match p.clone().cholesky() {
        Some(ch) => ch.solve(&b),
        None => p.clone().lu().solve(&b).ok_or(Error::Solver {
            residual: f64::INFINITY,
            tolerance: SOLVER_RESIDUAL_TOLERANCE,
        })?,
    };
    // One step of iterative refinement.
    let r = &b - &p * &x;
    if let Some(ch) = p.clone().cholesky() {
        x += ch.solve(&r);
    }
    let residual = relative_residual(&p, &x, &b);
    if !(residual <= SOLVER_RESIDUAL_TOLERANCE) {
        return Err(Error::Solver {
            residual,
            tolerance: SOLVER_RESIDUAL_TOLERANCE,
        });
    }
    let charges = x.iter().map(|xi| xi / coulomb).collect();
    Ok(FieldSolution {
        tips,
        head_of_tip,
        radii,
        charges,
        applied_voltage,
        coulomb,
        residual,
    })
}

impl FieldSolution {
    /// Builds a solution from given charges, e.g. to study superposition.
    pub fn from_charges(
        tips: Vec<Tip>,
        head_of_tip: Vec<usize>,
        radii: Vec<f64>,
        charges: Vec<f64>,
        applied_voltage: f64,
        constants: &PhysicalConstants,
    ) -> Self {
        Self {
            tips,
            head_of_tip,
            radii,
            charges,
            applied_voltage,
            coulomb: constants.coulomb_constant(),
            residual: f64::NAN,
        }
    }

    pub fn tips(&self) -> &[Tip] {
        &self.tips
    }

    pub fn tip_points(&self) -> Vec<Vector3<f64>> {
        self.tips.iter().map(|t| t.position).collect()
    }

    pub fn tip_charges(&self) -> &[f64] {
        &self.charges
    }

    pub fn head_of_tip(&self) -> &[usize] {
        &self.head_of_tip
    }

    pub fn regularization_radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn applied_voltage(&self) -> f64 {
        self.applied_voltage
    }

    /// The grounded plane is z = 0.
    pub fn plane_height(&self) -> f64 {
        0.0
    }

    /// Relative residual of the charge solve (NaN for hand-built solutions).
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn head_count(&self) -> usize {
        self.head_of_tip.iter().max().map_or(0, |h| h + 1)
    }

    /// The charges of one head alone, unchanged.
    pub fn head_subset(&self, head: usize) -> FieldSolution {
        let idx: Vec<usize> = (0..self.tips.len()).filter(|&i| self.head_of_tip[i] == head).collect();
        FieldSolution {
            tips: idx.iter().map(|&i| self.tips[i]).collect(),
            head_of_tip: vec![0; idx.len()],
            radii: idx.iter().map(|&i| self.radii[i]).collect(),
            charges: idx.iter().map(|&i| self.charges[i]).collect(),
            applied_voltage: self.applied_voltage,
            coulomb: self.coulomb,
            residual: f64::NAN,
        }
    }

    /// Point one regularization radius outward along the spike of tip `i`.
    pub fn tip_evaluation_point(&self, i: usize) -> Vector3<f64> {
        self.tips[i].position + self.tips[i].direction * self.radii[i]
    }

    /// Points inside a regularization sphere are moved radially onto its
    /// surface (along the spike direction when exactly at the center).
    fn clamp(&self, point: &Vector3<f64>) -> Vector3<f64> {
        for (t, &a) in self.tips.iter().zip(&self.radii) {
            let d = point - t.position;
            let r2 = d.norm_squared();
            if r2 < a * a {
                let dir = if r2 > 0.0 { d / r2.sqrt() } else { t.direction };
                return t.position + dir * a;
            }
        }
        *point
    }

    pub fn potential_at(&self, point: &Vector3<f64>) -> f64 {
        let x = self.clamp(point);
        let mut phi = 0.0;
        for (t, q) in self.tips.iter().zip(&self.charges) {
            phi += q * image_kernel(&x, &t.position);
        }
        self.coulomb * phi
    }

    /// Distance from `point` to the closest tip center, floored at that
    /// tip's regularization radius.
    pub fn nearest_tip_distance(&self, point: &Vector3<f64>) -> f64 {
        self.tips
            .iter()
            .zip(&self.radii)
            .map(|(t, &a)| (point - t.position).norm().max(a))
            .fold(f64::INFINITY, f64::min)
    }

    /// Analytic −∇φ of the charge/image superposition.
    pub fn field_at(&self, point: &Vector3<f64>) -> Vector3<f64> {
        let x = self.clamp(point);
        let mut e = Vector3::zeros();
        for (t, q) in self.tips.iter().zip(&self.charges) {
            let d = x - t.position;
            let di = x - mirror(&t.position);
            let r = d.norm();
            let ri = di.norm();
            e += d * (q / (r * r * r)) - di * (q / (ri * ri * ri));
        }
        e * self.coulomb
    }
}

/// ρ_i = |E_array| / |E_head alone| at each tip's evaluation point, in
/// layout tip order (head-major).
pub fn tip_interference_ratios(
    layout: &ArrayLayout,
    conditions: &ProcessConditions,
    constants: &PhysicalConstants,
) -> Result<Vec<f64>> {
    let array = solve_tip_charges(layout, conditions, constants)?;
    interference_ratios_for(&array, layout, conditions, constants)
}

/// Same as [`tip_interference_ratios`] reusing an already solved array.
pub fn interference_ratios_for(
    array: &FieldSolution,
    layout: &ArrayLayout,
    conditions: &ProcessConditions,
    constants: &PhysicalConstants,
) -> Result<Vec<f64>> {
    let mut ratios = Vec::with_capacity(array.tips.len());
    let mut offset = 0;
    for head in &layout.heads {
        let alone = solve_tip_charges(&ArrayLayout::single(*head), conditions, constants)?;
        for k in 0..head.spike_count {
            let x = alone.tip_evaluation_point(k);
            let with_array = array.field_at(&x).norm();
            let isolated = alone.field_at(&x).norm();
            ratios.push(with_array / isolated);
        }
        offset += head.spike_count;
    }
    debug_assert_eq!(offset, array.tips.len());
    Ok(ratios)
}

/// A tip forms a cone-jet iff its interference ratio reaches `threshold`.
pub fn cone_jet_active(ratios: &[f64], threshold: f64) -> Result<Vec<bool>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::invalid(
            "cone_jet.activity_threshold",
            format!("must lie in (0, 1), got {threshold}"),
        ));
    }
    Ok(ratios.iter().map(|&r| r >= threshold).collect())
}
