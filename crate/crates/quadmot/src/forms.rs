//! Declared invariants of a quadratic form and the bookkeeping of its
//! generic splitting tower.
//!
//! Nothing here inspects an actual field. A profile lists what is known about
//! `q` (dimension, higher Witt indices, Kahn dimensions, membership in powers
//! of the fundamental ideal) and [`validate`] checks the implications between
//! those declarations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormProfile {
    pub dim: u32,
    /// Higher Witt indices `(i_1, …, i_h)`. For an isotropic profile the
    /// first entry is the Witt index of `q` itself.
    #[serde(default)]
    pub splitting_pattern: Vec<u32>,
    /// Kahn dimensions `dim_n(q)` by `n`.
    #[serde(default)]
    pub kahn_dims: BTreeMap<u32, u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disc_trivial: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clifford_index: Option<u32>,
    /// Largest declared `m` with `q ∈ I^m`.
    #[serde(default)]
    pub i_power: u32,
    /// Names of the classes `ω_{n+1}(q)`, by `n`.
    #[serde(default)]
    pub symbols: BTreeMap<u32, String>,
    #[serde(default = "yes")]
    pub anisotropic: bool,
}

fn yes() -> bool {
    true
}

impl FormProfile {
    pub fn new(dim: u32, splitting_pattern: Vec<u32>) -> Self {
        FormProfile {
            dim,
            splitting_pattern,
            kahn_dims: BTreeMap::new(),
            disc_trivial: None,
            clifford_index: None,
            i_power: 0,
            symbols: BTreeMap::new(),
            anisotropic: true,
        }
    }

    pub fn with_kahn(mut self, n: u32, value: u32) -> Self {
        self.kahn_dims.insert(n, value);
        self
    }

    pub fn with_symbol(mut self, n: u32, name: &str) -> Self {
        self.symbols.insert(n, name.to_string());
        self
    }

    pub fn with_i_power(mut self, m: u32) -> Self {
        self.i_power = m;
        self
    }

    pub fn isotropic(mut self) -> Self {
        self.anisotropic = false;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("profile: {e}")))
    }

    pub fn kahn(&self, n: u32) -> Option<u32> {
        self.kahn_dims.get(&n).copied()
    }

    pub fn in_power(&self, m: u32) -> bool {
        self.i_power >= m
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TowerLevel {
    /// Label of the field `K_j`.
    pub field: String,
    /// Dimension of the anisotropic part of `q` over `K_j`.
    pub anisotropic_dim: u32,
    pub remaining_pattern: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplittingTower {
    /// Witt index of `q` over the base field.
    pub witt_index: u32,
    pub levels: Vec<TowerLevel>,
}

impl SplittingTower {
    pub fn dims(&self) -> Vec<u32> {
        self.levels.iter().map(|l| l.anisotropic_dim).collect()
    }
}

/// The generic splitting tower: `K_{j+1} = K_j(q_j)`, with
/// `dim q_{j+1} = dim q_j - 2 i_{j+1}`.
pub fn build_tower(p: &FormProfile) -> Result<SplittingTower> {
    if p.dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut pattern = p.splitting_pattern.clone();
    if pattern.contains(&0) {
        return Err(Error::InvalidArgument("splitting pattern entries must be positive".into()));
    }
    let witt_index = if p.anisotropic {
        0
    } else {
        if pattern.is_empty() {
            return Err(Error::MissingData("isotropic profile needs its Witt index".into()));
        }
        pattern.remove(0)
    };
    if 2 * witt_index > p.dim {
        return Err(Error::InvalidArgument(format!(
            "Witt index {witt_index} too large for dimension {}",
            p.dim
        )));
    }
    let mut cur = p.dim - 2 * witt_index;
    let mut levels = vec![TowerLevel {
        field: "K_0".into(),
        anisotropic_dim: cur,
        remaining_pattern: pattern.clone(),
    }];
    for (j, &i) in pattern.iter().enumerate() {
        if cur <= 1 || 2 * i > cur {
            return Err(Error::InvalidArgument(format!(
                "higher Witt index i_{} = {i} does not fit anisotropic dimension {cur}",
                j + 1
            )));
        }
        cur -= 2 * i;
        levels.push(TowerLevel {
            field: format!("K_{}", j + 1),
            anisotropic_dim: cur,
            remaining_pattern: pattern[j + 1..].to_vec(),
        });
    }
    if cur > 1 {
        return Err(Error::InvalidArgument(format!(
            "splitting pattern stops at anisotropic dimension {cur}"
        )));
    }
    Ok(SplittingTower { witt_index, levels })
}

/// The level `j` of the `K(n)`-kernel form, the first with `dim q_j ≤ 2^{n+1}`,
/// and its dimension.
pub fn kn_kernel_index(p: &FormProfile, n: u32) -> Result<(usize, u32)> {
    let tower = build_tower(p)?;
    let bound = 1u64 << (n + 1);
    tower
        .levels
        .iter()
        .enumerate()
        .find(|(_, l)| l.anisotropic_dim as u64 <= bound)
        .map(|(j, l)| (j, l.anisotropic_dim))
        .ok_or_else(|| Error::InvalidArgument("tower never reaches the kernel bound".into()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: &'static str,
    pub message: String,
}

fn push(out: &mut Vec<Violation>, code: &'static str, message: String) {
    out.push(Violation { code, message });
}

/// All violated implications between the declared invariants; empty when
/// the profile is consistent.
pub fn validate(p: &FormProfile) -> Vec<Violation> {
    let mut out = Vec::new();
    let tower = match build_tower(p) {
        Ok(t) => Some(t),
        Err(e) => {
            push(&mut out, "pattern", e.to_string());
            None
        }
    };
    let m = p.i_power;
    if m >= 1 && p.dim % 2 == 1 {
        push(&mut out, "parity", format!("q ∈ I but dim {} is odd", p.dim));
    }
    if m >= 2 && p.disc_trivial == Some(false) {
        push(&mut out, "discriminant", "q ∈ I^2 but the discriminant is declared nontrivial".into());
    }
    if m >= 1 {
        // every anisotropic kernel along the tower is again in I^m
        let floor = 1u64 << m;
        let dims = match &tower {
            Some(t) => t.dims(),
            None if p.anisotropic => vec![p.dim],
            None => vec![],
        };
        for (j, d) in dims.iter().enumerate() {
            if *d > 0 && (*d as u64) < floor {
                push(
                    &mut out,
                    "arason-pfister",
                    format!("anisotropic form of dimension {d} at level {j} cannot lie in I^{m}"),
                );
            }
        }
    }
    if let Some(c) = p.clifford_index {
        if !c.is_power_of_two() {
            push(&mut out, "clifford-index", format!("index {c} is not a power of 2"));
        }
    }
    let mut prev: Option<(u32, u32)> = None;
    for (&n, &dn) in &p.kahn_dims {
        if dn % 2 != p.dim % 2 {
            push(&mut out, "kahn-parity", format!("dim_{n} = {dn} has the wrong parity"));
        }
        if dn > p.dim {
            push(&mut out, "kahn-bound", format!("dim_{n} = {dn} exceeds dim q = {}", p.dim));
        }
        if n == 1 && dn > 2 {
            push(&mut out, "kahn-bound", format!("dim_1 = {dn} exceeds 2"));
        }
        if m > n && dn != 0 {
            push(&mut out, "kahn-ideal", format!("q ∈ I^{m} forces dim_{n} = 0, got {dn}"));
        }
        if let Some((pn, pd)) = prev {
            if pd > dn {
                push(&mut out, "kahn-monotone", format!("dim_{pn} = {pd} > dim_{n} = {dn}"));
            }
        }
        if (dn as u64) < (1u64 << n) && !p.symbols.contains_key(&n) {
            push(&mut out, "symbol-missing", format!("dim_{n} < 2^{n} but ω_{} is not named", n + 1));
        }
        prev = Some((n, dn));
    }
    if let (Some(t), Some(&d2)) = (&tower, p.kahn_dims.get(&2)) {
        if p.dim.is_multiple_of(2) && d2 > 4 {
            if let Ok((j, kd)) = kn_kernel_index(p, 2) {
                let rest = &t.levels[j].remaining_pattern;
                let need: &[u32] = match kd {
                    6 => &[1],
                    8 => &[1, 1],
                    _ => &[],
                };
                if !rest.starts_with(need) {
                    push(
                        &mut out,
                        "k2-pattern",
                        format!("kernel form of dimension {kd} with dim_2 > 4 must split as {need:?}, got {rest:?}"),
                    );
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tower_dims() {
        let p = FormProfile::new(12, vec![2, 1, 3]);
        assert_eq!(build_tower(&p).unwrap().dims(), vec![12, 8, 6, 0]);
        let pf = FormProfile::new(8, vec![4]);
        assert_eq!(build_tower(&pf).unwrap().dims(), vec![8, 0]);
        let split = FormProfile::new(4, vec![2]).isotropic();
        assert_eq!(build_tower(&split).unwrap().dims(), vec![0]);
        assert!(build_tower(&FormProfile::new(6, vec![4])).is_err());
    }

    #[test]
    fn kernel_index() {
        assert_eq!(kn_kernel_index(&FormProfile::new(12, vec![2, 1, 3]), 2).unwrap(), (1, 8));
        assert_eq!(kn_kernel_index(&FormProfile::new(10, vec![1, 4]), 2).unwrap(), (1, 8));
        assert_eq!(kn_kernel_index(&FormProfile::new(7, vec![1, 2]), 2).unwrap(), (0, 7));
    }

    #[test]
    fn validation_rules() {
        let bad = FormProfile::new(6, vec![1, 2]).with_i_power(3);
        assert!(validate(&bad).iter().any(|v| v.code == "arason-pfister"));
        let parity = FormProfile::new(8, vec![4]).with_kahn(2, 3).with_symbol(2, "a");
        assert!(validate(&parity).iter().any(|v| v.code == "kahn-parity"));
        let pfister = FormProfile::new(8, vec![4]).with_i_power(3).with_kahn(2, 0).with_symbol(2, "a");
        assert_eq!(validate(&pfister), vec![]);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(FormProfile::from_json(r#"{"dim": 5, "colour": 1}"#).is_err());
        let p = FormProfile::from_json(r#"{"dim": 5, "splitting_pattern": [1, 1], "kahn_dims": {"2": 3}}"#)
            .unwrap();
        assert_eq!(p.kahn(2), Some(3));
    }
}
