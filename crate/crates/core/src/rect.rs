//! Frequency rectangles of size `lambda` with one side of width `mu`.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// `{xi : xi - center in [-size, size]^d, |normal . xi - offset| <= thickness}`.
///
/// Both inequalities are closed.
#[derive(Clone, Debug, PartialEq)]
pub struct FreqRect {
    center: Vec<f64>,
    size: f64,
    normal: Vec<f64>,
    offset: f64,
    thickness: f64,
}

impl FreqRect {
    pub fn new(center: Vec<f64>, size: f64, normal: Vec<f64>, offset: f64, thickness: f64) -> Result<Self> {
        if center.len() != normal.len() || center.is_empty() {
            return Err(Error::Argument(format!(
                "center has dimension {} but normal has {}",
                center.len(),
                normal.len()
            )));
        }
        let norm = normal.iter().map(|a| a * a).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Argument(format!("normal has length {norm}, expected 1")));
        }
        if !(1.0 <= thickness && thickness <= size) {
            return Err(Error::Argument(format!("need 1 <= mu <= lambda, got mu={thickness}, lambda={size}")));
        }
        Ok(Self { center, size, normal, offset, thickness })
    }

    /// Rectangle whose slab passes through its own center.
    pub fn centered(center: Vec<f64>, size: f64, normal: Vec<f64>, thickness: f64) -> Result<Self> {
        let offset = dot(&center, &normal);
        Self::new(center, size, normal, offset, thickness)
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn size(&self) -> f64 {
        self.size
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, xi: &[f64]) -> bool {
        let in_box = xi.iter().zip(&self.center).all(|(x, c)| (x - c).abs() <= self.size);
        in_box && (dot(&self.normal, xi) - self.offset).abs() <= self.thickness
    }

    /// The same rectangle translated by `shift` in frequency.
    pub fn translated(&self, shift: &[f64]) -> Self {
        let center = self.center.iter().zip(shift).map(|(c, s)| c + s).collect();
        Self {
            center,
            size: self.size,
            normal: self.normal.clone(),
            offset: self.offset + dot(&self.normal, shift),
            thickness: self.thickness,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn boundary_is_closed() {
        let r = FreqRect::new(vec![0.0; 4], 4.0, vec![1.0, 0.0, 0.0, 0.0], 0.0, 2.0).unwrap();
        assert!(r.contains(&[2.0, 0.0, 0.0, 0.0]));
        assert!(r.contains(&[-2.0, 4.0, -4.0, 0.0]));
        assert!(!r.contains(&[2.5, 0.0, 0.0, 0.0]));
        assert!(!r.contains(&[0.0, 0.0, 4.5, 0.0]));
    }

    #[test]
    fn validates_parameters() {
        assert!(FreqRect::new(vec![0.0; 2], 4.0, vec![1.0, 1.0], 0.0, 1.0).is_err());
        assert!(FreqRect::new(vec![0.0; 2], 4.0, vec![1.0, 0.0], 0.0, 8.0).is_err());
        assert!(FreqRect::new(vec![0.0; 2], 4.0, vec![1.0, 0.0], 0.0, 0.5).is_err());
    }
}
