//! Flag value parsers.

fn num(s: &str) -> Result<f64, String> {
    let t = s.trim();
    t.parse::<f64>().map_err(|_| format!("not a number: `{t}`"))
}

/// `lo1,hi1,lo2,hi2`.
pub fn parse_box(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s.split(',').map(num).collect::<Result<_, _>>()?;
    <[f64; 4]>::try_from(v).map_err(|v| format!("box needs 4 numbers, got {}", v.len()))
}

/// `300` or `300x200`.
pub fn parse_grid(s: &str) -> Result<[usize; 2], String> {
    let one = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad grid size `{t}`"));
    match s.split_once(['x', 'X']) {
        Some((a, b)) => Ok([one(a)?, one(b)?]),
        None => {
            let n = one(s)?;
            Ok([n, n])
        }
    }
}

/// Nonnegative integer, also in float notation such as `2e6`.
pub fn parse_count(s: &str) -> Result<usize, String> {
    let v = num(s)?;
    if v < 0.0 || v.fract() != 0.0 || v > 1e15 {
        return Err(format!("not a count: `{s}`"));
    }
    Ok(v as usize)
}

/// `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`.
pub fn parse_complex(s: &str) -> Result<[f64; 2], String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty complex number".into());
    }
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return Ok([num(&t)?, 0.0]);
    };
    // split at the last sign that is not an exponent sign or the leading one
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (num(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => num(v)?,
    };
    Ok([re, im])
}

/// Comma-separated complex numbers.
pub fn parse_points(s: &str) -> Result<Vec<[f64; 2]>, String> {
    if s.trim().is_empty() {
        return Ok(vec![]);
    }
    s.split(',').map(parse_complex).collect()
}

/// Rows separated by `;`, entries by `,`.
pub fn parse_residues(s: &str) -> Result<Vec<Vec<f64>>, String> {
    s.split(';').map(|row| row.split(',').map(num).collect()).collect()
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(num).collect()
}
