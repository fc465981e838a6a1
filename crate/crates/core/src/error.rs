use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("value {value} outside the domain [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    #[error("nonlinearity vanishes at I = {intensity}")]
    SingularNonlinearity { intensity: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid profile: {0}")]
    Profile(String),

    #[error("point ({intensity}, {chi}) lies outside the reachable hodograph region")]
    Unreachable { intensity: f64, chi: f64 },

    #[error("collapse reached: z = {z} is not below the singular distance {z_collapse}")]
    CollapseReached { z: f64, z_collapse: f64 },

    #[error("solution becomes multivalued; last good z = {last_good_z}")]
    Multivalued { last_good_z: f64 },

    #[error("no sign change of the target function on [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("Newton iteration stalled or hit a fold; last good parameter = {last_good}")]
    Fold { last_good: f64 },

    #[error("quadrature did not converge: estimate {estimate}, error bound {bound}")]
    Integration { estimate: f64, bound: f64 },

    #[error("intensity is singular at (x, z) = ({x}, {z}) away from a fold")]
    SingularIntensity { x: f64, z: f64 },

    #[error("reference integration unstable at z = {z}: relative power change {drift} at the minimum step")]
    Unstable { z: f64, drift: f64 },

    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
