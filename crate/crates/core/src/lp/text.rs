//! Plain-text LP fixtures.
//!
//! ```text
//! # comment
//! max
//! obj 1 2
//! row 1 1 <= 4
//! bound 0 -inf 3
//! ```
//! Variables default to `[0, inf)`.

use super::{LinearProgram, LpError};
use crate::{Cmp, Sense};

fn num(tok: &str) -> Result<f64, LpError> {
    match tok {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => tok.parse().map_err(|_| LpError::Malformed(format!("bad number `{tok}`"))),
    }
}

pub fn parse_lp(text: &str) -> Result<LinearProgram, LpError> {
    let mut sense = None;
    let mut lp: Option<LinearProgram> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: &str| LpError::Malformed(format!("line {}: {msg}", lineno + 1));
        match toks[0] {
            "min" | "max" => sense = Some(toks[0].parse::<Sense>().map_err(|e| bad(&e))?),
            "obj" => {
                let s = sense.ok_or_else(|| bad("sense must precede obj"))?;
                let c = toks[1..].iter().map(|t| num(t)).collect::<Result<Vec<_>, _>>()?;
                lp = Some(LinearProgram::new(s, c));
            }
            "row" => {
                let p = lp.as_mut().ok_or_else(|| bad("obj must precede rows"))?;
                if toks.len() != p.num_vars() + 3 {
                    return Err(bad("wrong number of row entries"));
                }
                let n = p.num_vars();
                let coeffs = toks[1..=n].iter().map(|t| num(t)).collect::<Result<Vec<_>, _>>()?;
                let cmp: Cmp = toks[n + 1].parse().map_err(|e: String| bad(&e))?;
                let rhs = num(toks[n + 2])?;
                p.add_row(coeffs, cmp, rhs);
            }
            "bound" => {
                let p = lp.as_mut().ok_or_else(|| bad("obj must precede bounds"))?;
                if toks.len() != 4 {
                    return Err(bad("bound needs index, lo, hi"));
                }
                let j: usize = toks[1].parse().map_err(|_| bad("bad index"))?;
                if j >= p.num_vars() {
                    return Err(bad("index out of range"));
                }
                p.set_bounds(j, num(toks[2])?, num(toks[3])?);
            }
            other => return Err(bad(&format!("unknown directive `{other}`"))),
        }
    }
    let lp = lp.ok_or_else(|| LpError::Malformed("missing obj line".into()))?;
    lp.validate()?;
    Ok(lp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fixture() {
        let lp = parse_lp("max\nobj 1 2\nrow 1 1 <= 4 # cap\nbound 1 -inf 3\n").unwrap();
        assert_eq!(lp.num_rows(), 1);
        assert_eq!(lp.upper[1], 3.0);
        assert_eq!(lp.lower[1], f64::NEG_INFINITY);
    }

    #[test]
    fn rejects_short_row() {
        assert!(parse_lp("min\nobj 1 2\nrow 1 <= 4\n").is_err());
    }
}
