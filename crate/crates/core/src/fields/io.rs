use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::field::{FieldTag, ScalarField};
use crate::fields::grid::{Grid, GridKind};

/// Write a field snapshot: `# grid=<kind>,nx=..,ny=..` header, a column
/// header, then one `i,j,x,y,value` row per node. Values round-trip
/// bit-exactly (shortest round-trip float formatting).
pub fn save_field_csv(f: &ScalarField, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let grid = f.grid();
    let kind = match grid.kind() {
        GridKind::Rectangle { .. } => "rectangle",
        GridKind::Disk { .. } => "disk",
    };
    (|| -> std::io::Result<()> {
        writeln!(w, "# grid={kind},nx={},ny={}", grid.nx(), grid.ny())?;
        writeln!(w, "i,j,x,y,value")?;
        for i in 0..grid.nx() {
            for j in 0..grid.ny() {
                let p = grid.node(i, j);
                writeln!(w, "{i},{j},{},{},{}", p.x(), p.y(), f.value_at(i, j))?;
            }
        }
        w.flush()
    })()
    .map_err(|e| Error::io(path, e))
}

/// Read a field snapshot written by [`save_field_csv`]. The grid is
/// reconstructed from the header and node coordinates.
pub fn load_field_csv(path: &Path) -> Result<ScalarField> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let parse_err = |reason: &str| Error::Parse {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };

    let header = lines
        .next()
        .ok_or_else(|| parse_err("empty file"))?
        .map_err(|e| Error::io(path, e))?;
    let header = header
        .strip_prefix("# grid=")
        .ok_or_else(|| parse_err("missing `# grid=` header"))?;
    let mut kind = None;
    let mut nx = None;
    let mut ny = None;
    for (idx, part) in header.split(',').enumerate() {
        if idx == 0 {
            kind = Some(part.to_string());
        } else if let Some(v) = part.strip_prefix("nx=") {
            nx = Some(v.parse::<usize>().map_err(|_| parse_err("bad nx"))?);
        } else if let Some(v) = part.strip_prefix("ny=") {
            ny = Some(v.parse::<usize>().map_err(|_| parse_err("bad ny"))?);
        }
    }
    let kind = kind.ok_or_else(|| parse_err("missing grid kind"))?;
    let nx = nx.ok_or_else(|| parse_err("missing nx"))?;
    let ny = ny.ok_or_else(|| parse_err("missing ny"))?;

    let mut xs = vec![0.0f64; nx * ny];
    let mut ys = vec![0.0f64; nx * ny];
    let mut values = vec![0.0f64; nx * ny];
    let mut seen = vec![false; nx * ny];
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() || line.starts_with('#') || line.starts_with("i,") {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(parse_err(&format!("expected 5 columns, got {}", cols.len())));
        }
        let i: usize = cols[0].parse().map_err(|_| parse_err("bad i"))?;
        let j: usize = cols[1].parse().map_err(|_| parse_err("bad j"))?;
        if i >= nx || j >= ny {
            return Err(parse_err("node index out of range"));
        }
        let k = i * ny + j;
        xs[k] = cols[2].parse().map_err(|_| parse_err("bad x"))?;
        ys[k] = cols[3].parse().map_err(|_| parse_err("bad y"))?;
        values[k] = cols[4].parse().map_err(|_| parse_err("bad value"))?;
        seen[k] = true;
    }
    if seen.iter().any(|&s| !s) {
        return Err(parse_err("missing node rows"));
    }

    let grid = match kind.as_str() {
        "rectangle" => {
            let x0 = xs[0];
            let y0 = ys[0];
            let x1 = xs[(nx - 1) * ny];
            let y1 = ys[ny - 1];
            Grid::rectangle(x0, x1, y0, y1, nx, ny)?
        }
        "disk" => {
            let radius = xs[(nx - 1) * ny].hypot(ys[(nx - 1) * ny]);
            Grid::disk(radius, nx, ny)?
        }
        other => return Err(parse_err(&format!("unknown grid kind `{other}`"))),
    };
    ScalarField::new(grid, values, FieldTag::Generic)
}
