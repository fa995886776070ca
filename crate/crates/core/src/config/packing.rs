use minilp::{ComparisonOp, OptimizationDirection, Problem};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::{Configuration, Line};
use crate::error::{Error, Result};
use crate::exact::{exact_from_f64, limit_denominator, ExactScalar};

/// Largest denominator used when storing decimal coordinates.
const COORD_DENOMINATOR: u64 = 1_000_000_000_000;

/// Reads `m` lines in `R^d` from whitespace-separated decimals, row-major.
/// Lines starting with `#` are comments.
pub fn parse_packing(text: &str, d: usize, m: usize, name: &str) -> Result<Configuration> {
    if d == 0 || m == 0 {
        return Err(Error::domain("d and m must be positive"));
    }
    let mut values = Vec::with_capacity(d * m);
    let mut last_line = 1;
    'scan: for (ln, line) in text.lines().enumerate() {
        last_line = ln + 1;
        if line.trim_start().starts_with('#') {
            continue;
        }
        let mut col = 0;
        for tok in line.split_whitespace() {
            col += 1;
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: ln + 1,
                column: col,
                message: format!("bad number `{tok}`"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: ln + 1,
                    column: col,
                    message: format!("non-finite value `{tok}`"),
                });
            }
            values.push(v);
            if values.len() == d * m {
                break 'scan;
            }
        }
    }
    if values.len() < d * m {
        return Err(Error::Parse {
            line: last_line,
            column: 1,
            message: format!("expected {} numbers, found {}", d * m, values.len()),
        });
    }
    let rows: Vec<Vec<f64>> = values.chunks(d).map(<[f64]>::to_vec).collect();
    let lines = float_lines(&rows, d)?;
    Configuration::new(name, d, lines, false)
}

/// Unit-normalised float rows stored as rational lines, one per line
/// (antipodal duplicates dropped).
pub(crate) fn float_lines(rows: &[Vec<f64>], d: usize) -> Result<Vec<Line>> {
    let cap = BigInt::from(COORD_DENOMINATOR);
    let mut units: Vec<Vec<f64>> = Vec::new();
    let mut out = Vec::new();
    for row in rows {
        let n = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n == 0.0 {
            return Err(Error::domain("zero row cannot define a line"));
        }
        let u: Vec<f64> = row.iter().map(|x| x / n).collect();
        let dup = units.iter().any(|w| {
            let c: f64 = (0..d).map(|k| u[k] * w[k]).sum();
            c.abs() > 1.0 - 1e-9
        });
        if dup {
            continue;
        }
        let coords = u
            .iter()
            .map(|&x| {
                Ok(ExactScalar::from_rational(limit_denominator(
                    &exact_from_f64(x)?,
                    &cap,
                )))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(Line::new(coords)?);
        units.push(u);
    }
    Ok(out)
}

/// Which pairs of lines contribute a midpoint during augmentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MidpointRule {
    /// Midpoints of the edges of the convex hull of `{±a_x}`.
    #[default]
    HullEdges,
    /// For every pair, the midpoint of `a_x` and `sign⟨a_x, a_y⟩·a_y`, and
    /// both midpoints for orthogonal pairs.
    MaxAlignment,
}

/// Adds the normalised midpoints selected by `rule` to the configuration.
pub fn augment_edge_midpoints(conf: &Configuration, rule: MidpointRule) -> Result<Configuration> {
    if conf.m() < 2 {
        return Err(Error::domain("augmentation needs at least two lines"));
    }
    let units: Vec<Vec<f64>> = conf.lines().iter().map(Line::unit_f64).collect();
    let m = units.len();
    let d = conf.d;
    let dotf = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };

    let mut pairs: Vec<(usize, usize, i64)> = Vec::new();
    match rule {
        MidpointRule::MaxAlignment => {
            for x in 0..m {
                for y in x + 1..m {
                    let c = dotf(&units[x], &units[y]);
                    if c.abs() < 1e-12 {
                        pairs.push((x, y, 1));
                        pairs.push((x, y, -1));
                    } else {
                        pairs.push((x, y, if c > 0.0 { 1 } else { -1 }));
                    }
                }
            }
        }
        MidpointRule::HullEdges => {
            let mut pts: Vec<Vec<f64>> = Vec::with_capacity(2 * m);
            for u in &units {
                pts.push(u.clone());
                pts.push(u.iter().map(|v| -v).collect());
            }
            for x in 0..m {
                for y in x + 1..m {
                    for s in [1i64, -1] {
                        let q = 2 * y + usize::from(s < 0);
                        if is_hull_edge(&pts, 2 * x, q, d)? {
                            pairs.push((x, y, s));
                        }
                    }
                }
            }
        }
    }

    let mut lines = conf.lines().to_vec();
    let mut all_units = units.clone();
    let mut exact = conf.exact;
    for (x, y, s) in pairs {
        let mid: Vec<f64> = (0..d)
            .map(|k| units[x][k] + s as f64 * units[y][k])
            .collect();
        let n = dotf(&mid, &mid).sqrt();
        if n < 1e-12 {
            continue;
        }
        let u: Vec<f64> = mid.iter().map(|v| v / n).collect();
        if all_units.iter().any(|w| dotf(w, &u).abs() > 1.0 - 1e-9) {
            continue;
        }
        let (lx, ly) = (&conf.lines()[x], &conf.lines()[y]);
        let line = if conf.exact && lx.norm_sq() == ly.norm_sq() {
            let sgn = ExactScalar::from_int(s);
            Line::new(
                lx.coords()
                    .iter()
                    .zip(ly.coords())
                    .map(|(a, b)| a + &(&sgn * b))
                    .collect(),
            )?
        } else {
            exact = false;
            float_lines(&[u.clone()], d)?.remove(0)
        };
        lines.push(line);
        all_units.push(u);
    }
    let mut out = Configuration::new(format!("{}+midpoints", conf.name), d, lines, exact)?;
    out.mirrors = conf.mirrors.clone();
    Ok(out)
}

/// True when the segment `[p, q]` is an edge of the convex hull of `pts`:
/// its midpoint admits no convex representation using any other point.
fn is_hull_edge(pts: &[Vec<f64>], p: usize, q: usize, d: usize) -> Result<bool> {
    let mut prob = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..pts.len())
        .map(|r| prob.add_var(if r == p || r == q { 0.0 } else { 1.0 }, (0.0, 1.0)))
        .collect();
    for k in 0..d {
        let row: Vec<_> = vars.iter().zip(pts).map(|(&v, pt)| (v, pt[k])).collect();
        prob.add_constraint(&row[..], ComparisonOp::Eq, 0.5 * (pts[p][k] + pts[q][k]));
    }
    let ones: Vec<_> = vars.iter().map(|&v| (v, 1.0)).collect();
    prob.add_constraint(&ones[..], ComparisonOp::Eq, 1.0);
    let sol = prob
        .solve()
        .map_err(|e| Error::domain(format!("edge test LP failed: {e}")))?;
    Ok(sol.objective() < 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_three_lines() {
        let c = parse_packing("1 0 0 1 0.7071 0.7071", 2, 3, "t").unwrap();
        assert_eq!(c.m(), 3);
        for l in c.lines() {
            let n: f64 = l.unit_f64().iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse_packing("# header\n1 0\n0 nan", 2, 2, "t") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (3, 2)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_packing("1 0 0", 2, 2, "t"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_packing("1 0 x 1", 2, 2, "t"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn orthogonal_pair_gains_both_bisectors() {
        let c = parse_packing("1 0 0 1", 2, 2, "t").unwrap();
        for rule in [MidpointRule::HullEdges, MidpointRule::MaxAlignment] {
            assert_eq!(augment_edge_midpoints(&c, rule).unwrap().m(), 4);
        }
    }
}
