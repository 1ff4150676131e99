//! CSV export and a versioned little-endian binary checkpoint for ensemble states.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{BoundarySpec, EnsembleState, GridInterval, TiltParams};
use crate::error::{Error, Result};

const STATE_MAGIC: &[u8; 4] = b"TLES";
const STATE_VERSION: u32 = 1;

/// Writes `line_index,t,height` rows, line-major.
pub fn write_csv<W: Write>(state: &EnsembleState, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["line_index", "t", "height"])?;
    let times = state.grid().times();
    for i in 0..state.n_lines() {
        for (j, h) in state.line(i).iter().enumerate() {
            w.write_record([i.to_string(), format!("{}", times[j]), format!("{h}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(state: &EnsembleState, path: &Path) -> Result<()> {
    write_csv(state, fs::File::create(path)?)
}

/// Append-only byte encoder shared by the state and chain checkpoints.
#[derive(Default)]
pub(crate) struct Encoder {
    pub buf: Vec<u8>,
}

impl Encoder {
    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    pub fn u128(&mut self, v: u128) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    pub fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_bits().to_le_bytes());
    }
    pub fn f64s(&mut self, v: &[f64]) {
        self.u64(v.len() as u64);
        v.iter().for_each(|&x| self.f64(x));
    }
    pub fn bytes(&mut self, v: &[u8]) {
        self.u64(v.len() as u64);
        self.buf.extend_from_slice(v);
    }
}

pub(crate) struct Decoder<'a> {
    data: &'a [u8],
}

impl<'a> Decoder<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data }
    }

    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        if self.data.len() < k {
            return Err(Error::Domain("truncated checkpoint data".into()));
        }
        let (a, b) = self.data.split_at(k);
        self.data = b;
        Ok(a)
    }
    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    pub fn u128(&mut self) -> Result<u128> {
        Ok(u128::from_le_bytes(self.take(16)?.try_into().unwrap()))
    }
    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }
    pub fn len(&mut self, limit: usize) -> Result<usize> {
        let k = self.u64()? as usize;
        if k > limit {
            return Err(Error::Domain(format!("length {k} exceeds remaining data")));
        }
        Ok(k)
    }
    pub fn f64s(&mut self) -> Result<Vec<f64>> {
        let k = self.len(self.data.len() / 8)?;
        (0..k).map(|_| self.f64()).collect()
    }
    pub fn bytes(&mut self) -> Result<&'a [u8]> {
        let k = self.len(self.data.len())?;
        self.take(k)
    }
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

pub(crate) fn encode_state_into(e: &mut Encoder, s: &EnsembleState) {
    let g = s.grid();
    e.f64(g.ell());
    e.f64(g.r());
    e.u64(g.steps() as u64);
    e.u64(s.n_lines() as u64);
    let t = s.tilt();
    e.f64(t.a());
    e.f64(t.lambda());
    e.u8(t.is_diagnostic() as u8);
    match s.boundary() {
        BoundarySpec::Zero => e.u8(0),
        BoundarySpec::Free => e.u8(1),
        BoundarySpec::Fixed { left, right } => {
            e.u8(2);
            e.f64s(left);
            e.f64s(right);
        }
    }
    e.f64s(s.raw_heights());
    e.f64s(s.floor());
    e.f64s(s.ceiling());
    let mask: Vec<u8> = s.pinned_mask().iter().map(|&p| p as u8).collect();
    e.bytes(&mask);
}

pub(crate) fn decode_state_from(d: &mut Decoder<'_>) -> Result<EnsembleState> {
    let ell = d.f64()?;
    let r = d.f64()?;
    let steps = d.u64()? as usize;
    let grid = GridInterval::new(ell, r, steps)?;
    let n = d.u64()? as usize;
    let (a, lambda, diag) = (d.f64()?, d.f64()?, d.u8()? != 0);
    let tilt = if diag {
        TiltParams::diagnostic(a, lambda)?
    } else {
        TiltParams::new(a, lambda)?
    };
    let boundary = match d.u8()? {
        0 => BoundarySpec::Zero,
        1 => BoundarySpec::Free,
        2 => BoundarySpec::Fixed {
            left: d.f64s()?,
            right: d.f64s()?,
        },
        k => return Err(Error::Domain(format!("unknown boundary tag {k}"))),
    };
    let heights = d.f64s()?;
    let floor = d.f64s()?;
    let ceiling = d.f64s()?;
    let pinned = d.bytes()?.iter().map(|&b| b != 0).collect();
    EnsembleState::from_raw(grid, n, heights, boundary, tilt, floor, ceiling, pinned)
}

/// Serializes a state into the versioned binary format.
pub fn encode_state(state: &EnsembleState) -> Vec<u8> {
    let mut e = Encoder::default();
    e.buf.extend_from_slice(STATE_MAGIC);
    e.u32(STATE_VERSION);
    encode_state_into(&mut e, state);
    e.buf
}

pub fn decode_state(bytes: &[u8]) -> Result<EnsembleState> {
    if bytes.len() < 8 || &bytes[..4] != STATE_MAGIC {
        return Err(Error::Domain("not a state checkpoint".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != STATE_VERSION {
        return Err(Error::Domain(format!("unsupported checkpoint version {version}")));
    }
    let mut d = Decoder::new(&bytes[8..]);
    let s = decode_state_from(&mut d)?;
    if !d.is_empty() {
        return Err(Error::Domain("trailing bytes after state".into()));
    }
    Ok(s)
}

pub fn save_state(state: &EnsembleState, path: &Path) -> Result<()> {
    fs::write(path, encode_state(state))?;
    Ok(())
}

pub fn load_state(path: &Path) -> Result<EnsembleState> {
    let bytes = fs::read(path)?;
    decode_state(&bytes).map_err(|e| Error::Checkpoint {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let g = GridInterval::new(-1.0, 1.0, 8).unwrap();
        let s = EnsembleState::new(
            g,
            2,
            TiltParams::new(1.5, 3.0).unwrap(),
            BoundarySpec::Fixed {
                left: vec![2.0, 1.0],
                right: vec![1.5, 0.5],
            },
        )
        .unwrap()
        .with_pins(&[4])
        .unwrap();
        let back = decode_state(&encode_state(&s)).unwrap();
        assert_eq!(back, s);
        let mut bad = encode_state(&s);
        bad[4] = 9;
        assert!(decode_state(&bad).is_err());
        assert!(decode_state(&encode_state(&s)[..20]).is_err());
    }

    #[test]
    fn csv_rows() {
        let g = GridInterval::new(0.0, 1.0, 2).unwrap();
        let s = EnsembleState::new(g, 1, TiltParams::new(1.0, 2.0).unwrap(), BoundarySpec::Zero).unwrap();
        let mut out = Vec::new();
        write_csv(&s, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("line_index,t,height\n0,0,0\n"));
    }
}
