use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series for {0} did not converge")]
    NonConvergence(&'static str),

    #[error("integrand is not finite at x = {0}")]
    NonFiniteIntegrand(f64),

    #[error("unsupported jet kernel: {0}")]
    UnsupportedKernel(String),

    #[error("invalid MIMO configuration: {0}")]
    InvariantViolation(String),

    #[error("constellation size {0} is not supported (use 4, 16, 64 or 256)")]
    InvalidModulation(u32),

    #[error("({m_o}, {m_i}) cannot be realized by {scheme}")]
    Unrealizable {
        scheme: &'static str,
        m_o: u32,
        m_i: u32,
    },

    #[error("constraint cannot be met with m_o <= {0}")]
    Infeasible(u32),

    #[error("no candidate scheme satisfies the constraint")]
    AllInfeasible,
}
