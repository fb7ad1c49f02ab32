use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {name} = {value} ({reason})")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("derivative order {order} exceeds the supported maximum {max}")]
    Order { order: usize, max: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("quadrature did not converge after {subdivisions} subdivisions (value {value:e}, error estimate {error:e})")]
    Convergence {
        value: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("finite-difference step collapsed: x - n*h = {lower} is outside the domain")]
    StepCollapse { lower: f64 },

    #[error("evaluation failed at n = {n}, x = {x:e}: {source}")]
    Evaluation {
        n: usize,
        x: f64,
        #[source]
        source: Box<Error>,
    },
}

/// Checks that `x` is finite and strictly positive.
pub(crate) fn positive(name: &'static str, x: f64) -> Result<f64> {
    if !x.is_finite() {
        Err(Error::Domain {
            name,
            value: x,
            reason: "must be finite",
        })
    } else if x <= 0.0 {
        Err(Error::Domain {
            name,
            value: x,
            reason: "must be > 0",
        })
    } else {
        Ok(x)
    }
}
