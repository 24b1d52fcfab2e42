use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scatter::{Channel, NonreciprocityMap, Normalization, ScatterResult};
use crate::units::{amplitude_db, deg_to_rad, hz_to_rad, rad_to_deg, rad_to_hz};

pub const SCATTER_HEADER: [&str; 10] = [
    "f_in_hz",
    "f_out_hz",
    "in_port",
    "in_harmonic",
    "out_port",
    "out_harmonic",
    "dtheta_deg",
    "s_re",
    "s_im",
    "s_db",
];

pub const NONRECIPROCITY_HEADER: [&str; 4] = ["f_hz", "dtheta_deg", "pair", "n_db"];

/// Twelve significant digits in scientific notation; negative zero prints as zero.
pub fn format_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

/// Indices of `results` by ascending phase; rejects results on different grids.
fn phase_order(results: &[ScatterResult]) -> Result<Vec<usize>> {
    let first = results
        .first()
        .ok_or_else(|| Error::InvalidArgument("nothing to write".into()))?;
    for r in results {
        if r.omegas != first.omegas || r.channels != first.channels || r.omega_p != first.omega_p {
            return Err(Error::InvalidArgument(
                "sweeps do not share one grid".into(),
            ));
        }
    }
    let mut order: Vec<usize> = (0..results.len()).collect();
    order.sort_by(|&a, &b| results[a].dtheta.total_cmp(&results[b].dtheta));
    Ok(order)
}

/// Long-format rows sorted by (probe frequency, phase, out channel, in channel).
pub fn write_scatter_csv<W: Write>(results: &[ScatterResult], out: W) -> Result<()> {
    let order = phase_order(results)?;
    let first = &results[0];
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SCATTER_HEADER)?;
    for (f, &probe) in first.omegas.iter().enumerate() {
        for &p in &order {
            let r = &results[p];
            let m = &r.s[f];
            let dtheta = format_float(rad_to_deg(r.dtheta));
            for (o, co) in r.channels.iter().enumerate() {
                for (i, ci) in r.channels.iter().enumerate() {
                    let z = m[(o, i)];
                    w.write_record([
                        format_float(rad_to_hz(ci.omega(probe, r.omega_p))),
                        format_float(rad_to_hz(co.omega(probe, r.omega_p))),
                        ci.port.clone(),
                        ci.harmonic.to_string(),
                        co.port.clone(),
                        co.harmonic.to_string(),
                        dtheta.clone(),
                        format_float(z.re),
                        format_float(z.im),
                        format_float(amplitude_db(z.norm())),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

struct Row {
    line: u64,
    f_in: f64,
    f_out: f64,
    input: Channel,
    output: Channel,
    dtheta_deg: f64,
    s: Complex64,
}

fn parse_rows<R: Read>(input: R) -> Result<Vec<Row>> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(SCATTER_HEADER.iter().copied()) {
        return Err(Error::Parse(format!(
            "line 1: expected header '{}'",
            SCATTER_HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let num = |k: usize| -> Result<f64> {
            rec[k].trim().parse::<f64>().map_err(|_| {
                Error::Parse(format!(
                    "line {line}: field '{}' is not a number",
                    SCATTER_HEADER[k]
                ))
            })
        };
        let int = |k: usize| -> Result<i32> {
            rec[k].trim().parse::<i32>().map_err(|_| {
                Error::Parse(format!(
                    "line {line}: field '{}' is not an integer",
                    SCATTER_HEADER[k]
                ))
            })
        };
        rows.push(Row {
            line,
            f_in: num(0)?,
            f_out: num(1)?,
            input: Channel::new(rec[2].to_string(), int(3)?),
            output: Channel::new(rec[4].to_string(), int(5)?),
            dtheta_deg: num(6)?,
            s: Complex64::new(num(7)?, num(8)?),
        });
    }
    Ok(rows)
}

/// Reads a file written by [`write_scatter_csv`] back into one result per
/// phase. The file does not record the normalization; photon flux is assumed.
pub fn read_scatter_csv<R: Read>(input: R) -> Result<Vec<ScatterResult>> {
    let rows = parse_rows(input)?;
    let first = rows
        .first()
        .ok_or_else(|| Error::Parse("file has no data rows".into()))?;
    let n = rows.iter().take_while(|r| r.output == first.output).count();
    if rows.len() % (n * n) != 0 {
        return Err(Error::Parse(format!(
            "{} rows do not form whole {n}x{n} blocks",
            rows.len()
        )));
    }
    let channels: Vec<Channel> = rows[..n].iter().map(|r| r.input.clone()).collect();
    let fp_hz = rows
        .iter()
        .find(|r| r.output.harmonic != r.input.harmonic)
        .map(|r| (r.f_out - r.f_in) / (r.output.harmonic - r.input.harmonic) as f64)
        .unwrap_or(0.0);

    let mut results: Vec<ScatterResult> = Vec::new();
    for block in rows.chunks(n * n) {
        for (k, r) in block.iter().enumerate() {
            if r.input != channels[k % n]
                || r.output != channels[k / n]
                || r.dtheta_deg != block[0].dtheta_deg
            {
                return Err(Error::Parse(format!("line {}: row out of order", r.line)));
            }
        }
        let probe_hz = block[0].f_in - block[0].input.harmonic as f64 * fp_hz;
        let probe = hz_to_rad(probe_hz);
        let dtheta = deg_to_rad(block[0].dtheta_deg);
        let m = CMatrix::from_fn(n, n, |o, i| block[o * n + i].s);
        match results.iter_mut().find(|r| r.dtheta == dtheta) {
            Some(r) => {
                r.omegas.push(probe);
                r.s.push(m);
            }
            None => results.push(ScatterResult {
                channels: channels.clone(),
                omegas: vec![probe],
                omega_p: hz_to_rad(fp_hz),
                dtheta,
                normalization: Normalization::PhotonFlux,
                s: vec![m],
            }),
        }
    }
    let len = results[0].omegas.len();
    if results.iter().any(|r| r.omegas.len() != len) {
        return Err(Error::Parse(
            "phases do not share one frequency grid".into(),
        ));
    }
    Ok(results)
}

/// Rows sorted by (frequency, phase, pair). Clamped cells carry
/// [`crate::scatter::NR_CLAMPED_DB`].
pub fn write_nonreciprocity_csv<W: Write>(map: &NonreciprocityMap, out: W) -> Result<()> {
    let mut order: Vec<usize> = (0..map.dthetas.len()).collect();
    order.sort_by(|&a, &b| map.dthetas[a].total_cmp(&map.dthetas[b]));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(NONRECIPROCITY_HEADER)?;
    for (f, &omega) in map.omegas.iter().enumerate() {
        let f_hz = format_float(rad_to_hz(omega));
        for &p in &order {
            let dtheta = format_float(rad_to_deg(map.dthetas[p]));
            for pair in &map.pairs {
                w.write_record([
                    f_hz.clone(),
                    dtheta.clone(),
                    pair.name.clone(),
                    format_float(pair.n_db[p][f]),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
