use std::fmt::Write as _;
use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64 as C64;

use super::grid::MomentumGrid;
use super::wavefunction::{GridWaveFunction, Space};
use super::EvolutionError;
use crate::operator_algebra::{RepClass, Sign};
use crate::spin_reps::RepLabel;

pub const MAGIC: &[u8; 4] = b"P1N1";
pub const VERSION: u32 = 1;

fn class_tag(c: RepClass) -> u8 {
    match c {
        RepClass::I => 1,
        RepClass::IILimit => 2,
        RepClass::III => 3,
    }
}

/// Writes the binary snapshot: header, then little-endian `(re, im)` pairs
/// component-major in row-major grid order.
pub fn write_snapshot<W: Write>(f: &GridWaveFunction, mut w: W) -> Result<(), EvolutionError> {
    let g = f.grid();
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    w.write_u32::<LittleEndian>(g.n() as u32)?;
    let label = f.rep().label().to_string();
    w.write_u32::<LittleEndian>(label.len() as u32)?;
    w.write_all(label.as_bytes())?;
    w.write_u8(class_tag(f.class()))?;
    w.write_f64::<LittleEndian>(f.mass())?;
    w.write_i8(if f.eps() == Sign::Plus { 1 } else { -1 })?;
    w.write_u8(match f.space() {
        Space::Momentum => 0,
        Space::Position => 1,
    })?;
    for &(lo, hi) in g.extents() {
        w.write_f64::<LittleEndian>(lo)?;
        w.write_f64::<LittleEndian>(hi)?;
    }
    for &c in g.counts() {
        w.write_u64::<LittleEndian>(c as u64)?;
    }
    w.write_u32::<LittleEndian>(f.components().len() as u32)?;
    for a in f.components() {
        for z in a {
            w.write_f64::<LittleEndian>(z.re)?;
            w.write_f64::<LittleEndian>(z.im)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn snapshot_bytes(f: &GridWaveFunction) -> Vec<u8> {
    let mut v = Vec::new();
    write_snapshot(f, &mut v).expect("writing to memory cannot fail");
    v
}

fn fmt_err(e: std::io::Error) -> EvolutionError {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        EvolutionError::Format("truncated snapshot".into())
    } else {
        EvolutionError::Io(e)
    }
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<GridWaveFunction, EvolutionError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(fmt_err)?;
    if &magic != MAGIC {
        return Err(EvolutionError::Format("bad magic".into()));
    }
    let version = r.read_u32::<LittleEndian>().map_err(fmt_err)?;
    if version != VERSION {
        return Err(EvolutionError::Format(format!("unsupported version {version}")));
    }
    let n = r.read_u32::<LittleEndian>().map_err(fmt_err)? as usize;
    if n == 0 || n > 16 {
        return Err(EvolutionError::Format(format!("implausible dimension {n}")));
    }
    let len = r.read_u32::<LittleEndian>().map_err(fmt_err)? as usize;
    if len > 64 {
        return Err(EvolutionError::Format("rep label too long".into()));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf).map_err(fmt_err)?;
    let label: RepLabel = String::from_utf8(buf)
        .map_err(|_| EvolutionError::Format("rep label is not UTF-8".into()))?
        .parse()
        .map_err(|e| EvolutionError::Format(format!("rep label: {e}")))?;
    let class = match r.read_u8().map_err(fmt_err)? {
        1 => RepClass::I,
        2 => RepClass::IILimit,
        3 => RepClass::III,
        t => return Err(EvolutionError::Format(format!("unknown class tag {t}"))),
    };
    let mass = r.read_f64::<LittleEndian>().map_err(fmt_err)?;
    let eps = match r.read_i8().map_err(fmt_err)? {
        1 => Sign::Plus,
        -1 => Sign::Minus,
        e => return Err(EvolutionError::Format(format!("bad sign {e}"))),
    };
    let space = match r.read_u8().map_err(fmt_err)? {
        0 => Space::Momentum,
        1 => Space::Position,
        s => return Err(EvolutionError::Format(format!("bad space tag {s}"))),
    };
    let mut extents = Vec::with_capacity(n);
    for _ in 0..n {
        let lo = r.read_f64::<LittleEndian>().map_err(fmt_err)?;
        let hi = r.read_f64::<LittleEndian>().map_err(fmt_err)?;
        extents.push((lo, hi));
    }
    let mut counts = Vec::with_capacity(n);
    for _ in 0..n {
        counts.push(r.read_u64::<LittleEndian>().map_err(fmt_err)? as usize);
    }
    let grid = MomentumGrid::new(extents, counts)
        .map_err(|e| EvolutionError::Format(e.to_string()))?;
    let rep = label.build(n)?;
    let comps = r.read_u32::<LittleEndian>().map_err(fmt_err)? as usize;
    if comps != rep.dim() {
        return Err(EvolutionError::Format(format!(
            "{comps} components for a {}-dimensional rep",
            rep.dim()
        )));
    }
    let mut amplitudes = Vec::with_capacity(comps);
    for _ in 0..comps {
        let mut a = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let re = r.read_f64::<LittleEndian>().map_err(fmt_err)?;
            let im = r.read_f64::<LittleEndian>().map_err(fmt_err)?;
            a.push(C64::new(re, im));
        }
        amplitudes.push(a);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(EvolutionError::Format("trailing bytes after amplitudes".into()));
    }
    GridWaveFunction::new(grid, rep, class, mass, eps, space, amplitudes)
}

/// `t,re,im` rows.
pub fn time_series_csv(rows: &[(f64, C64)]) -> String {
    let mut s = String::from("t,re,im\n");
    for (t, z) in rows {
        let _ = writeln!(s, "{},{},{}", t, z.re, z.im);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::PacketSpec;
    use crate::spin_reps::so3_spin;

    #[test]
    fn round_trip_preserves_everything() {
        let grid = MomentumGrid::new(vec![(-3.0, 3.0); 3], vec![4, 8, 4]).unwrap();
        let spec = PacketSpec {
            center: vec![0.1, 0.2, 0.3],
            width: vec![1.0; 3],
            offset: vec![],
            weights: vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)],
        };
        let f = GridWaveFunction::gaussian(
            grid,
            so3_spin(0.5).unwrap(),
            RepClass::I,
            1.5,
            Sign::Minus,
            &spec,
        )
        .unwrap();
        let bytes = snapshot_bytes(&f);
        assert_eq!(&bytes[..4], b"P1N1");
        let back = read_snapshot(bytes.as_slice()).unwrap();
        assert_eq!(back, f);
        assert_eq!(snapshot_bytes(&back), bytes);
        assert!(read_snapshot(&bytes[..bytes.len() - 3]).is_err());
        assert!(read_snapshot(&[][..]).is_err());
    }

    #[test]
    fn csv_uses_round_trip_precision() {
        let s = time_series_csv(&[(0.1, C64::new(1.0 / 3.0, -2.0))]);
        let line = s.lines().nth(1).unwrap();
        let re: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(re, 1.0 / 3.0);
    }
}
