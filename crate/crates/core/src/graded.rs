//! Finite-dimensional graded vector spaces with named basis vectors.

use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// A graded space supported on a finite degree window, with an ordered
/// named basis in each degree. Basis vectors also carry a global index
/// (degrees ascending, then position), used to flatten linear algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedSpace {
    d_min: i32,
    d_max: i32,
    basis: Vec<Vec<String>>, // indexed by degree - d_min
    by_name: BTreeMap<String, (i32, usize)>,
    global_offset: Vec<usize>,
    total: usize,
}

impl GradedSpace {
    pub fn new(degrees: Vec<(i32, Vec<String>)>) -> Result<Self> {
        let mut degrees = degrees;
        degrees.retain(|(_, names)| !names.is_empty());
        if degrees.is_empty() {
            return Ok(GradedSpace {
                d_min: 0,
                d_max: 0,
                basis: vec![Vec::new()],
                by_name: BTreeMap::new(),
                global_offset: vec![0, 0],
                total: 0,
            });
        }
        degrees.sort_by_key(|(d, _)| *d);
        let d_min = degrees.first().unwrap().0;
        let d_max = degrees.last().unwrap().0;
        let mut basis = vec![Vec::new(); (d_max - d_min + 1) as usize];
        for (d, names) in degrees {
            let slot = &mut basis[(d - d_min) as usize];
            if !slot.is_empty() {
                return Err(Error::Precondition(format!("degree {d} listed twice")));
            }
            *slot = names;
        }
        let mut by_name = BTreeMap::new();
        let mut global_offset = Vec::with_capacity(basis.len() + 1);
        let mut total = 0;
        for (off, names) in basis.iter().enumerate() {
            global_offset.push(total);
            for (i, n) in names.iter().enumerate() {
                let deg = d_min + off as i32;
                if by_name.insert(n.clone(), (deg, i)).is_some() {
                    return Err(Error::Precondition(format!(
                        "basis name {n:?} is not unique"
                    )));
                }
            }
            total += names.len();
        }
        global_offset.push(total);
        Ok(GradedSpace {
            d_min,
            d_max,
            basis,
            by_name,
            global_offset,
            total,
        })
    }

    pub fn window(&self) -> (i32, i32) {
        (self.d_min, self.d_max)
    }

    pub fn dim(&self, degree: i32) -> usize {
        if degree < self.d_min || degree > self.d_max {
            0
        } else {
            self.basis[(degree - self.d_min) as usize].len()
        }
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    pub fn names(&self, degree: i32) -> &[String] {
        if degree < self.d_min || degree > self.d_max {
            &[]
        } else {
            &self.basis[(degree - self.d_min) as usize]
        }
    }

    pub fn name(&self, degree: i32, local: usize) -> &str {
        &self.names(degree)[local]
    }

    pub fn find(&self, name: &str) -> Option<(i32, usize)> {
        self.by_name.get(name).copied()
    }

    pub fn global(&self, degree: i32, local: usize) -> usize {
        self.global_offset[(degree - self.d_min) as usize] + local
    }

    pub fn degree_of_global(&self, g: usize) -> (i32, usize) {
        let mut off = 0;
        for (i, names) in self.basis.iter().enumerate() {
            if g < off + names.len() {
                return (self.d_min + i as i32, g - off);
            }
            off += names.len();
        }
        panic!("global index {g} out of range");
    }

    pub fn global_name(&self, g: usize) -> &str {
        let (d, l) = self.degree_of_global(g);
        self.name(d, l)
    }

    pub fn degrees(&self) -> impl Iterator<Item = i32> + '_ {
        (self.d_min..=self.d_max).filter(|&d| self.dim(d) > 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_roundtrip() {
        let sp = GradedSpace::new(vec![
            (1, vec!["v".into()]),
            (-1, vec!["a".into(), "b".into()]),
            (0, vec!["x".into()]),
        ])
        .unwrap();
        assert_eq!(sp.window(), (-1, 1));
        assert_eq!(sp.total_dim(), 4);
        assert_eq!(sp.find("x"), Some((0, 0)));
        for g in 0..sp.total_dim() {
            let (d, l) = sp.degree_of_global(g);
            assert_eq!(sp.global(d, l), g);
        }
        assert_eq!(sp.dim(5), 0);
    }

    #[test]
    fn duplicate_names_rejected() {
        assert!(GradedSpace::new(vec![(0, vec!["x".into()]), (1, vec!["x".into()])]).is_err());
    }
}
