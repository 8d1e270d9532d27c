/// Geometric tolerances shared by the cone, region and evaluator stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Incidence and orientation threshold on unit-scale quantities.
    pub geom: f64,
    /// Residual norm below which a point counts as inside a cone.
    pub member: f64,
    /// Absolute coordinate distance under which two vertices are merged.
    pub dedup: f64,
    /// Two unit rays are merged when their dot product exceeds `1 - ray_merge`.
    pub ray_merge: f64,
    /// Intersection systems with a larger condition estimate are skipped.
    pub max_condition: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            geom: 1e-9,
            member: 1e-8,
            dedup: 1e-9,
            ray_merge: 1e-12,
            max_condition: 1e12,
        }
    }
}
