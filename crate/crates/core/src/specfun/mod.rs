//! Special functions, truncated Taylor arithmetic and quadrature.

mod hyper;
mod jet;
mod quad;

use alloc::boxed::Box;
use alloc::format;

pub use hyper::{gauss_2f1, gauss_2f1_taylor, hyp2f1_series, kummer_1f1, kummer_polynomial, pfaff_2f1};
pub use jet::{BiJet, Jet};
pub use quad::{integrate, integrate_vec, Domain, Quadrature, QuadratureSpec, QuadratureVec};

use crate::math::factorial;
use crate::{Error, Result};

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    crate::math::erfc(x)
}

/// Scalar functions whose Taylor expansion [`jet_lift`] knows how to build.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    /// `e^z`
    Exp,
    /// `slope * z + intercept`
    Affine { slope: f64, intercept: f64 },
    /// `2F1(a, b; c; z)` in its argument, for `z <= 0`.
    Gauss2F1 { a: f64, b: f64, c: f64 },
    /// Pointwise product.
    Product(Box<Kernel>, Box<Kernel>),
    /// `outer(inner(z))`.
    Compose { outer: Box<Kernel>, inner: Box<Kernel> },
}

/// Taylor expansion of a registered kernel about `z0` up to `order`.
pub fn jet_lift(kernel: &Kernel, z0: f64, order: usize) -> Result<Jet> {
    let id = Jet::variable(z0, order);
    lift_on(kernel, &id)
}

fn lift_on(kernel: &Kernel, arg: &Jet) -> Result<Jet> {
    let order = arg.order();
    match kernel {
        Kernel::Exp => Ok(arg.exp()),
        Kernel::Affine { slope, intercept } => Ok(arg.clone().scale(*slope).add_scalar(*intercept)),
        Kernel::Gauss2F1 { a, b, c } => {
            let x0 = arg.value();
            if x0 > 0.0 {
                return Err(Error::UnsupportedKernel(format!("2F1 expanded at positive argument {x0}")));
            }
            let outer = gauss_2f1_taylor(*a, *b, *c, x0, 1.0, order)?;
            Ok(arg.compose(&outer))
        }
        Kernel::Product(f, g) => Ok(&lift_on(f, arg)? * &lift_on(g, arg)?),
        Kernel::Compose { outer, inner } => {
            let inner = lift_on(inner, arg)?;
            lift_on(outer, &inner)
        }
    }
}

/// `k!`, exposed for callers converting coefficients to derivatives.
pub fn factorial_f64(k: usize) -> f64 {
    factorial(k)
}
