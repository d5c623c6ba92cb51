//! Finitely supported probability measures on a scaled integer lattice.
//!
//! A measure keeps its atoms on the integer lattice `Z^K` together with a
//! positive scale factor `λ`, so the supported real point for a key `z` is
//! `λ·z`. Every shift generated by the game is an integer vector, which keeps
//! belief supports exactly on the lattice and avoids floating-point key
//! collisions. Dilation (`m^{*λ}`) only touches the scale field.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Tolerance on total mass after any operation.
pub const MASS_TOL: f64 = 1e-12;

/// An integer translation applied to a measure, in lattice units. The real
/// displacement is `scale · v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedShift(pub Vec<i64>);

impl SignedShift {
    pub fn zero(k: usize) -> Self {
        SignedShift(vec![0; k])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// A finitely supported probability measure on `scale · Z^K`.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    atoms: BTreeMap<Vec<i64>, f64>,
    scale: f64,
    k: usize,
}

impl DiscreteMeasure {
    /// Dirac mass at a single lattice point.
    pub fn point_mass(z: Vec<i64>, scale: f64) -> Self {
        let k = z.len();
        debug_assert!(k >= 2, "K must be at least 2");
        debug_assert!(scale > 0.0);
        let mut atoms = BTreeMap::new();
        atoms.insert(z, 1.0);
        DiscreteMeasure { atoms, scale, k }
    }

    /// Dirac mass at the origin.
    pub fn dirac_zero(k: usize, scale: f64) -> Self {
        Self::point_mass(vec![0; k], scale)
    }

    /// Builds a measure from raw `(lattice point, weight)` pairs, merging
    /// duplicates and renormalizing.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (Vec<i64>, f64)>, scale: f64) -> Result<Self> {
        let mut map: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        let mut k = None;
        for (z, w) in atoms {
            if w < 0.0 {
                return Err(Error::BadMixtureWeights);
            }
            match k {
                None => k = Some(z.len()),
                Some(d) if d != z.len() => {
                    return Err(Error::DimensionMismatch { expected: d, got: z.len() })
                }
                _ => {}
            }
            if w > 0.0 {
                *map.entry(z).or_insert(0.0) += w;
            }
        }
        let total: f64 = map.values().sum();
        if !(total > 0.0) {
            return Err(Error::BadMixtureWeights);
        }
        for w in map.values_mut() {
            *w /= total;
        }
        Ok(DiscreteMeasure { atoms: map, scale, k: k.unwrap_or(0) })
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Vec<i64>, f64)> {
        self.atoms.iter().map(|(z, &w)| (z, w))
    }

    pub fn weight(&self, z: &[i64]) -> f64 {
        self.atoms.get(z).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.values().sum()
    }

    /// Translation `m_{♯v}`: every atom shifted by `v` lattice units.
    pub fn pushforward_shift(&self, v: &SignedShift) -> Result<Self> {
        if v.dim() != self.k {
            return Err(Error::DimensionMismatch { expected: self.k, got: v.dim() });
        }
        let atoms = self
            .atoms
            .iter()
            .map(|(z, &w)| {
                let shifted: Vec<i64> = z.iter().zip(&v.0).map(|(a, b)| a + b).collect();
                (shifted, w)
            })
            .collect();
        Ok(DiscreteMeasure { atoms, scale: self.scale, k: self.k })
    }

    /// Dilation `m^{*λ}`: multiplies the scale field, atoms untouched.
    pub fn dilate(&self, lambda: f64) -> Self {
        debug_assert!(lambda > 0.0);
        DiscreteMeasure { atoms: self.atoms.clone(), scale: self.scale * lambda, k: self.k }
    }

    /// Re-expresses the same measure on a lattice refined by an integer factor
    /// `s`: keys are multiplied by `s` and the scale divided by `s`. Used to
    /// make sub-unit shifts (`e_j/√T`) exactly representable.
    pub fn refine_lattice(&self, s: i64) -> Self {
        debug_assert!(s >= 1);
        let atoms = self
            .atoms
            .iter()
            .map(|(z, &w)| (z.iter().map(|c| c * s).collect::<Vec<i64>>(), w))
            .collect();
        DiscreteMeasure { atoms, scale: self.scale / s as f64, k: self.k }
    }

    /// Atomwise weighted sum of measures with identical dimension and scale,
    /// renormalized.
    pub fn mix(components: &[(f64, &DiscreteMeasure)]) -> Result<Self> {
        let (_, first) = components.first().ok_or(Error::BadMixtureWeights)?;
        let k = first.k;
        let scale = first.scale;
        let mut total = 0.0;
        for &(w, m) in components {
            if w < 0.0 {
                return Err(Error::BadMixtureWeights);
            }
            if m.k != k {
                return Err(Error::DimensionMismatch { expected: k, got: m.k });
            }
            if (m.scale - scale).abs() > 1e-12 * scale.max(m.scale) {
                return Err(Error::ScaleMismatch(scale, m.scale));
            }
            total += w;
        }
        if !(total > 0.0) {
            return Err(Error::BadMixtureWeights);
        }
        let mut atoms: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for &(w, m) in components {
            if w == 0.0 {
                continue;
            }
            let p = w / total;
            for (z, wz) in m.atoms.iter() {
                *atoms.entry(z.clone()).or_insert(0.0) += p * wz;
            }
        }
        atoms.retain(|_, w| *w > 0.0);
        let mass: f64 = atoms.values().sum();
        for w in atoms.values_mut() {
            *w /= mass;
        }
        Ok(DiscreteMeasure { atoms, scale, k })
    }

    /// Mean in real coordinates (`scale · E[z]`).
    pub fn mean(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.k];
        for (z, w) in self.atoms.iter() {
            for (o, &c) in out.iter_mut().zip(z.iter()) {
                *o += w * c as f64;
            }
        }
        for o in out.iter_mut() {
            *o *= self.scale;
        }
        out
    }

    /// Weighted sum `∫ f dm`, with `f` evaluated at real coordinates.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        let mut buf = vec![0.0; self.k];
        let mut acc = 0.0;
        for (z, w) in self.atoms.iter() {
            for (b, &c) in buf.iter_mut().zip(z.iter()) {
                *b = self.scale * c as f64;
            }
            acc += w * f(&buf);
        }
        acc
    }

    /// `∫ max_i x^i dm`.
    pub fn expected_max(&self) -> f64 {
        self.integrate(|x| x.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
    }

    /// Drops atoms with weight below `eps` and renormalizes. Returns the new
    /// measure and the removed mass.
    pub fn prune(&self, eps: f64) -> Result<(Self, f64)> {
        debug_assert!(eps >= 0.0);
        let mut atoms: BTreeMap<Vec<i64>, f64> = self
            .atoms
            .iter()
            .filter(|(_, &w)| w >= eps)
            .map(|(z, &w)| (z.clone(), w))
            .collect();
        let kept: f64 = atoms.values().sum();
        if !(kept > 0.0) {
            return Err(Error::AllMassPruned(eps));
        }
        let removed = 1.0 - kept;
        for w in atoms.values_mut() {
            *w /= kept;
        }
        Ok((DiscreteMeasure { atoms, scale: self.scale, k: self.k }, removed))
    }

    /// Atoms sorted lexicographically by lattice key; the canonical view used
    /// for serialization and cache keys.
    pub fn sorted_atoms(&self) -> Vec<(Vec<i64>, f64)> {
        let mut v: Vec<(Vec<i64>, f64)> = self.atoms.iter().map(|(z, &w)| (z.clone(), w)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    /// Atomwise comparison on the common lattice, up to `tol` in weights.
    pub fn approx_eq(&self, other: &DiscreteMeasure, tol: f64) -> bool {
        if self.k != other.k || (self.scale - other.scale).abs() > 1e-12 * self.scale.max(other.scale) {
            return false;
        }
        let mut keys: Vec<&Vec<i64>> = self.atoms.keys().chain(other.atoms.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.iter().all(|z| (self.weight(z) - other.weight(z)).abs() <= tol)
    }

    /// JSON form `{ "k": .., "scale": .., "atoms": [[z1..zK, w], ..] }` with
    /// atoms sorted lexicographically for reproducible diffs.
    pub fn to_json(&self) -> Value {
        let atoms: Vec<Value> = self
            .sorted_atoms()
            .into_iter()
            .map(|(z, w)| {
                let mut row: Vec<Value> = z.into_iter().map(|c| json!(c)).collect();
                row.push(json!(w));
                Value::Array(row)
            })
            .collect();
        json!({ "k": self.k, "scale": self.scale, "atoms": atoms })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::InvalidConfig(format!("measure json: {m}"));
        let k = v.get("k").and_then(Value::as_u64).ok_or_else(|| bad("missing k"))? as usize;
        let scale = v.get("scale").and_then(Value::as_f64).ok_or_else(|| bad("missing scale"))?;
        let rows = v.get("atoms").and_then(Value::as_array).ok_or_else(|| bad("missing atoms"))?;
        let mut atoms = Vec::with_capacity(rows.len());
        for row in rows {
            let row = row.as_array().ok_or_else(|| bad("atom row not an array"))?;
            if row.len() != k + 1 {
                return Err(bad("atom row length"));
            }
            let z: Option<Vec<i64>> = row[..k].iter().map(Value::as_i64).collect();
            let w = row[k].as_f64().ok_or_else(|| bad("weight"))?;
            atoms.push((z.ok_or_else(|| bad("coordinate"))?, w));
        }
        Self::from_atoms(atoms, scale)
    }
}
