use nalgebra::{Matrix3, Matrix6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Isotropic linear elastic material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    #[serde(rename = "E")]
    pub youngs_modulus: f64,
    #[serde(rename = "nu")]
    pub poisson_ratio: f64,
    #[serde(rename = "rho")]
    pub density: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self::steel()
    }
}

impl MaterialParams {
    pub fn steel() -> Self {
        MaterialParams {
            youngs_modulus: 210e9,
            poisson_ratio: 0.3,
            density: 7800.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.youngs_modulus > 0.0
            && self.youngs_modulus.is_finite()
            && (0.0..0.5).contains(&self.poisson_ratio)
            && self.density > 0.0
            && self.density.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!(
                "material out of range: E={}, nu={}, rho={}",
                self.youngs_modulus, self.poisson_ratio, self.density
            )))
        }
    }

    pub fn lame(&self) -> (f64, f64) {
        let e = self.youngs_modulus;
        let nu = self.poisson_ratio;
        let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
        let mu = e / (2.0 * (1.0 + nu));
        (lambda, mu)
    }

    /// Longitudinal bar wave speed sqrt(E/rho).
    pub fn bar_wave_speed(&self) -> f64 {
        (self.youngs_modulus / self.density).sqrt()
    }

    /// 3D Hooke matrix, Voigt order [xx, yy, zz, yz, xz, xy] with engineering shear.
    pub fn c3d(&self) -> Matrix6<f64> {
        let (l, m) = self.lame();
        let mut c = Matrix6::zeros();
        for i in 0..3 {
            for j in 0..3 {
                c[(i, j)] = l;
            }
            c[(i, i)] = l + 2.0 * m;
            c[(i + 3, i + 3)] = m;
        }
        c
    }

    /// Plane strain matrix, Voigt order [xx, yy, xy] with engineering shear.
    pub fn c_plane_strain(&self) -> Matrix3<f64> {
        let (l, m) = self.lame();
        Matrix3::new(l + 2.0 * m, l, 0.0, l, l + 2.0 * m, 0.0, 0.0, 0.0, m)
    }
}
