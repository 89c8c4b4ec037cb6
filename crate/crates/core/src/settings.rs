use serde::{Deserialize, Serialize};

/// Normalization applied to each Floquet solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `c_0 = 1`.
    Unit,
    /// Unit l2 norm, largest coefficient real and positive.
    L2,
}

/// Numerical controls for the whole pipeline.  Defaults reproduce the
/// published tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Working precision in decimal digits (binary64 caps this at 15).
    pub precision_digits: u32,
    /// Initial Floquet window; `None` means `40 max(1, N)` on each side.
    pub window_m: Option<usize>,
    pub window_n: Option<usize>,
    pub window_growth: usize,
    pub max_window: usize,
    /// Thome terms computed up front; extended on demand up to `max_thome_terms`.
    pub thome_terms: usize,
    pub max_thome_terms: usize,
    /// Minimum Wronskian extraction index; the admissible bound is always enforced.
    pub extraction_n: Option<usize>,
    pub extraction_margin: usize,
    pub energy_bracket: Option<(f64, f64)>,
    /// Minimum number of steps around the unit circle.
    pub circuit_steps: usize,
    pub circuit_rtol: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub degeneracy_tol: f64,
    /// Integer shift of the Floquet labels (multiples of the lattice step).
    pub index_offset: i64,
    pub normalization: Normalization,
    /// Multiplies both Wronskian denominators (diagnostic; roots are invariant).
    pub denominator_scale: f64,
    pub root_tol: f64,
    pub scan_step: f64,
    /// Relative agreement required between extraction at `n*` and `n*+1`.
    pub stability_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            precision_digits: 15,
            window_m: None,
            window_n: None,
            window_growth: 8,
            max_window: 400,
            thome_terms: 60,
            max_thome_terms: 1200,
            extraction_n: None,
            extraction_margin: 10,
            energy_bracket: None,
            circuit_steps: 4096,
            circuit_rtol: 1e-13,
            newton_tol: 1e-13,
            newton_max_iter: 50,
            degeneracy_tol: 1e-6,
            index_offset: 0,
            normalization: Normalization::Unit,
            denominator_scale: 1.0,
            root_tol: 1e-11,
            scan_step: 0.1,
            stability_tol: 1e-9,
        }
    }
}

impl SolverSettings {
    /// Machine-limited tolerance implied by `precision_digits`.
    pub fn working_eps(&self) -> f64 {
        10f64.powi(-(self.precision_digits.min(15) as i32)).max(f64::EPSILON)
    }
}
