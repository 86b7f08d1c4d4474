//! Field serialization: a JSON document or a flat little-endian binary layout, both
//! listing `(k, coefficient array)` pairs for the stored modes.
//!
//! Binary layout (all integers `u32`/`i32` LE, floats `f64` LE):
//! `b"TFLD"`, version, `d`, `K`, `N`, `action_lo[d]`, `action_hi[d]`, mode count, then per
//! mode `k[d]` followed by `N^d` pairs `(re, im)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ScalarField;
use crate::error::{Error, Result};
use crate::space::TorusBox;

const MAGIC: &[u8; 4] = b"TFLD";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeRecord {
    pub k: Vec<i64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldRecord {
    pub space: TorusBox,
    pub modes: Vec<ModeRecord>,
}

impl ScalarField {
    pub fn to_record(&self) -> FieldRecord {
        FieldRecord {
            space: self.space().clone(),
            modes: self
                .modes()
                .map(|(k, data)| ModeRecord {
                    k,
                    re: data.iter().map(|c| c.re).collect(),
                    im: data.iter().map(|c| c.im).collect(),
                })
                .collect(),
        }
    }

    pub fn from_record(rec: &FieldRecord) -> Result<Self> {
        let s = &rec.space;
        let space = TorusBox::new(s.action_lo.clone(), s.action_hi.clone(), s.truncation, s.grid_points)?;
        let modes = rec
            .modes
            .iter()
            .map(|m| {
                if m.re.len() != m.im.len() {
                    return Err(Error::Format("re/im length mismatch".into()));
                }
                Ok((m.k.clone(), m.re.iter().zip(&m.im).map(|(&a, &b)| Complex64::new(a, b)).collect()))
            })
            .collect::<Result<Vec<_>>>()?;
        ScalarField::from_modes(&space, modes)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("records always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: FieldRecord = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_record(&rec)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let s = self.space();
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        for v in [VERSION, s.d as u32, s.truncation as u32, s.grid_points as u32] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for x in s.action_lo.iter().chain(&s.action_hi) {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out.extend_from_slice(&(self.n_stored_modes() as u32).to_le_bytes());
        for (k, data) in self.modes() {
            for kj in k {
                out.extend_from_slice(&(kj as i32).to_le_bytes());
            }
            for c in data {
                out.extend_from_slice(&c.re.to_le_bytes());
                out.extend_from_slice(&c.im.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let d = r.u32()? as usize;
        let truncation = r.u32()? as usize;
        let n = r.u32()? as usize;
        if d == 0 || d > 4 {
            return Err(Error::Format(format!("bad dimension {d}")));
        }
        let lo = (0..d).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let hi = (0..d).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let space = TorusBox::new(lo, hi, truncation, n)?;
        let count = r.u32()? as usize;
        let npts = space.n_actions();
        let mut modes = Vec::with_capacity(count.min(space.n_modes()));
        for _ in 0..count {
            let k = (0..d).map(|_| r.u32().map(|v| v as i32 as i64)).collect::<Result<Vec<_>>>()?;
            let data = (0..npts)
                .map(|_| Ok(Complex64::new(r.f64()?, r.f64()?)))
                .collect::<Result<Vec<_>>>()?;
            modes.push((k, data));
        }
        if r.pos != bytes.len() {
            return Err(Error::Format("trailing bytes".into()));
        }
        ScalarField::from_modes(&space, modes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Format("truncated input".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use proptest::prelude::*;

    use super::*;

    fn sample_field(a: f64, b: f64) -> ScalarField {
        let s = TorusBox::new(vec![0.0, -1.0], vec![1.0, 1.0], 3, 5).unwrap();
        ScalarField::from_fn(&s, move |th, i| a * (TAU * (th[0] - 2.0 * th[1])).sin() * i[1] + b * i[0] * i[0])
    }

    proptest! {
        #[test]
        fn binary_and_json_roundtrip(a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let f = sample_field(a, b);
            prop_assert_eq!(&ScalarField::from_bytes(&f.to_bytes()).unwrap(), &f);
            prop_assert_eq!(&ScalarField::from_json(&f.to_json()).unwrap(), &f);
        }

        #[test]
        fn truncated_binary_never_panics(cut in 0usize..400) {
            let bytes = sample_field(1.0, 2.0).to_bytes();
            let cut = cut.min(bytes.len() - 1);
            prop_assert!(ScalarField::from_bytes(&bytes[..cut]).is_err());
        }
    }
}
