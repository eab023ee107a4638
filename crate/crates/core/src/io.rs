//! Plain-text formats: complex numbers, symbolic windows, point sets, block
//! maps and flat `key=value` configuration files.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::delone::PointSet1D;
use crate::error::{Error, Result};
use crate::factors::BlockMap;
use crate::modelset::QuadraticInt;
use crate::subshift::{Letter, SymbolicWindow};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses `re`, `re+imi`, `re-imi` or `imi` (spaces ignored).
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse().ok().map(|re| Complex64::new(re, 0.0));
    };
    // split before the last sign that is not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (body[..i].parse().ok()?, &body[i..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse().ok()?,
    };
    Some(Complex64::new(re, im))
}

/// Inverse of [`parse_complex`]; purely real values print without `i`.
pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re + 0.0)
    } else {
        format!("{}{:+}i", z.re + 0.0, z.im)
    }
}

/// ```text
/// window lo <lo> alphabet <names>
/// weights <w_0> <w_1> ...
/// <letters, wrapped>
/// ```
pub fn write_window(w: &SymbolicWindow, names: &[char]) -> String {
    let mut s = String::new();
    let alphabet: String = names.iter().collect();
    writeln!(s, "window lo {} alphabet {}", w.lo(), alphabet).unwrap();
    let weights: Vec<String> = w.weights().iter().map(|&z| format_complex(z)).collect();
    writeln!(s, "weights {}", weights.join(" ")).unwrap();
    for chunk in w.letters().chunks(100) {
        let line: String = chunk.iter().map(|&l| names[l as usize]).collect();
        s.push_str(&line);
        s.push('\n');
    }
    s
}

/// Returns the window and the letter names.
pub fn read_window(text: &str) -> Result<(SymbolicWindow, Vec<char>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (n0, header) = lines.next().ok_or_else(|| parse_err(1, "empty window file"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    let (lo, names) = match toks.as_slice() {
        ["window", "lo", lo, "alphabet", names] => (
            lo.parse::<i64>().map_err(|_| parse_err(n0 + 1, "bad lo"))?,
            names.chars().collect::<Vec<char>>(),
        ),
        _ => return Err(parse_err(n0 + 1, "expected `window lo <lo> alphabet <names>`")),
    };
    let (n1, wline) = lines.next().ok_or_else(|| parse_err(n0 + 2, "missing weights"))?;
    let wtoks: Vec<&str> = wline.split_whitespace().collect();
    if wtoks.first() != Some(&"weights") {
        return Err(parse_err(n1 + 1, "expected `weights ...`"));
    }
    let weights = wtoks[1..]
        .iter()
        .map(|t| parse_complex(t).ok_or_else(|| parse_err(n1 + 1, format!("bad complex `{t}`"))))
        .collect::<Result<Vec<_>>>()?;
    let mut letters = Vec::new();
    for (n, line) in lines {
        for ch in line.trim().chars() {
            let id = names
                .iter()
                .position(|&c| c == ch)
                .ok_or_else(|| parse_err(n + 1, format!("letter `{ch}` not in alphabet")))?;
            letters.push(id as Letter);
        }
    }
    Ok((SymbolicWindow::new(lo, letters, weights)?, names))
}

fn fmt_qi(q: QuadraticInt) -> String {
    format!("{},{}", q.a, q.b)
}

fn parse_qi(s: &str) -> Option<QuadraticInt> {
    let (a, b) = s.split_once(',')?;
    Some(QuadraticInt::new(a.trim().parse().ok()?, b.trim().parse().ok()?))
}

/// Header `mode float|exact packing_radius <r> extent <lo> <hi>` (exact
/// extents as `a,b`), then one point per line: `x w_re w_im` or
/// `a b w_re w_im`.
pub fn write_points(ps: &PointSet1D) -> String {
    let mut s = String::new();
    match (ps.exact(), ps.exact_extent()) {
        (Some(exact), Some((lo, hi))) => {
            writeln!(
                s,
                "mode exact packing_radius {} extent {} {}",
                ps.packing_radius(),
                fmt_qi(lo),
                fmt_qi(hi)
            )
            .unwrap();
            for (q, w) in exact.iter().zip(ps.weights()) {
                writeln!(s, "{} {} {} {}", q.a, q.b, w.re + 0.0, w.im + 0.0).unwrap();
            }
        }
        _ => {
            let (lo, hi) = ps.extent();
            writeln!(
                s,
                "mode float packing_radius {} extent {} {}",
                ps.packing_radius(),
                lo,
                hi
            )
            .unwrap();
            for (x, w) in ps.points().iter().zip(ps.weights()) {
                writeln!(s, "{} {} {}", x, w.re + 0.0, w.im + 0.0).unwrap();
            }
        }
    }
    s
}

pub fn read_points(text: &str) -> Result<PointSet1D> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (n0, header) = lines.next().ok_or_else(|| parse_err(1, "empty point file"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    let bad_header = || {
        parse_err(
            n0 + 1,
            "expected `mode <float|exact> packing_radius <r> extent <lo> <hi>`",
        )
    };
    let ["mode", mode, "packing_radius", r, "extent", lo, hi] = toks.as_slice() else {
        return Err(bad_header());
    };
    let declared_r: f64 = r.parse().map_err(|_| bad_header())?;
    let num =
        |t: &str, n: usize| -> Result<f64> { t.parse().map_err(|_| parse_err(n + 1, format!("bad number `{t}`"))) };
    let ps = match *mode {
        "exact" => {
            let lo = parse_qi(lo).ok_or_else(bad_header)?;
            let hi = parse_qi(hi).ok_or_else(bad_header)?;
            let mut pts = Vec::new();
            let mut ws = Vec::new();
            for (n, line) in lines {
                let t: Vec<&str> = line.split_whitespace().collect();
                if t.len() != 4 {
                    return Err(parse_err(n + 1, "expected `a b w_re w_im`"));
                }
                let a = t[0].parse().map_err(|_| parse_err(n + 1, "bad integer"))?;
                let b = t[1].parse().map_err(|_| parse_err(n + 1, "bad integer"))?;
                pts.push(QuadraticInt::new(a, b));
                ws.push(Complex64::new(num(t[2], n)?, num(t[3], n)?));
            }
            PointSet1D::from_exact(pts, Some(ws), (lo, hi))?
        }
        "float" => {
            let lo = num(lo, n0)?;
            let hi = num(hi, n0)?;
            let mut pts = Vec::new();
            let mut ws = Vec::new();
            for (n, line) in lines {
                let t: Vec<&str> = line.split_whitespace().collect();
                if t.len() != 3 {
                    return Err(parse_err(n + 1, "expected `x w_re w_im`"));
                }
                pts.push(num(t[0], n)?);
                ws.push(Complex64::new(num(t[1], n)?, num(t[2], n)?));
            }
            PointSet1D::from_floats(pts, Some(ws), (lo, hi))?
        }
        _ => return Err(bad_header()),
    };
    let r = ps.packing_radius();
    if !(r.is_infinite() && declared_r.is_infinite()) && (r - declared_r).abs() > 1e-9 * (1.0 + r.abs()) {
        return Err(parse_err(
            n0 + 1,
            format!("declared packing radius {declared_r} but the points give {r}"),
        ));
    }
    Ok(ps)
}

/// Header `offset m length l`, then `word -> value` for each table entry.
pub fn write_block_map(g: &BlockMap, names: &[char]) -> String {
    let mut s = format!("offset {} length {}\n", g.offset(), g.length());
    for (w, &l) in g.table() {
        let word: String = w.iter().map(|&c| names[c as usize]).collect();
        writeln!(s, "{} -> {}", word, format_complex(g.outputs()[l as usize])).unwrap();
    }
    s
}

/// Reads a block map over the named alphabet. `#` starts a comment.
pub fn read_block_map(text: &str, names: &[char]) -> Result<BlockMap> {
    let mut header: Option<(i64, usize)> = None;
    let mut entries = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let Some((_, length)) = header else {
            let t: Vec<&str> = line.split_whitespace().collect();
            let ["offset", m, "length", l] = t.as_slice() else {
                return Err(parse_err(n + 1, "expected `offset m length l`"));
            };
            let m = m.parse().map_err(|_| parse_err(n + 1, "bad offset"))?;
            let l = l.parse().map_err(|_| parse_err(n + 1, "bad length"))?;
            header = Some((m, l));
            continue;
        };
        let (word, value) = line
            .split_once("->")
            .ok_or_else(|| parse_err(n + 1, "expected `word -> value`"))?;
        let word: Vec<Letter> = word
            .trim()
            .chars()
            .map(|c| {
                names
                    .iter()
                    .position(|&x| x == c)
                    .map(|i| i as Letter)
                    .ok_or_else(|| parse_err(n + 1, format!("letter `{c}` not in alphabet")))
            })
            .collect::<Result<_>>()?;
        if word.len() != length {
            return Err(parse_err(
                n + 1,
                format!("word has length {}, expected {length}", word.len()),
            ));
        }
        let value = parse_complex(value).ok_or_else(|| parse_err(n + 1, format!("bad value `{}`", value.trim())))?;
        entries.push((word, value));
    }
    let (offset, length) = header.ok_or_else(|| parse_err(1, "missing header"))?;
    BlockMap::from_values(offset, length, names.len(), entries)
}

/// Flat `key = value` lines; `#` starts a comment, later keys win.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| parse_err(n + 1, "expected `key = value`"))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(parse_err(n + 1, "empty key"));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}
