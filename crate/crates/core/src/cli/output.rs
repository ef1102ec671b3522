use std::io::{self, Write};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Value};

use crate::boundary::BoundaryCrossing;
use crate::tracer::RootLocusResult;

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Pretty printer that writes every float with 17 significant digits.
struct FullPrecision<'a>(PrettyFormatter<'a>);

impl Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

fn pair(z: &Complex64) -> Value {
    json!([z.re, z.im])
}

fn crossing(c: &BoundaryCrossing) -> Value {
    json!({
        "omega": c.omega,
        "k": c.sign.gain(c.kval),
        "line": c.line,
    })
}

pub fn result_value(result: &RootLocusResult) -> Value {
    let plant = &result.plant;
    json!({
        "plant": {
            "alpha": plant.alpha(),
            "delay": plant.delay(),
            "zeros": plant.zeros().iter().map(pair).collect::<Vec<_>>(),
            "poles": plant.poles().iter().map(pair).collect::<Vec<_>>(),
        },
        "region": {"sigma0": result.region.sigma0, "kmax": result.region.kmax},
        "crossings": {
            "inward": result.crossings.inward.iter().map(crossing).collect::<Vec<_>>(),
            "outward": result.crossings.outward.iter().map(crossing).collect::<Vec<_>>(),
        },
        "branch_points": result.branch_points.iter().map(|b| json!({
            "re": b.s.re,
            "im": b.s.im,
            "k": b.sign.gain(b.kval),
            "multiplicity": b.multiplicity,
            "active": b.active,
        })).collect::<Vec<_>>(),
        "trajectories": result.trajectories.iter().map(|t| json!({
            "origin": t.origin,
            "termination": t.termination,
            "sign": t.sign,
            "mirrored": t.mirrored,
            "points": t.points.iter().zip(t.gains()).map(|(p, k)| json!([p.sigma, p.omega, k])).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "warnings": result.warnings,
    })
}

pub fn write_json<W: Write>(result: &RootLocusResult, out: W) -> io::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(out, FullPrecision(PrettyFormatter::new()));
    result_value(result).serialize(&mut ser).map_err(io::Error::other)?;
    let mut out = ser.into_inner();
    out.write_all(b"\n")
}

pub fn write_csv<W: Write>(result: &RootLocusResult, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["traj_id", "sigma", "omega", "k"])?;
    for (id, t) in result.trajectories.iter().enumerate() {
        for (p, k) in t.points.iter().zip(t.gains()) {
            w.write_record([id.to_string(), fmt_f64(p.sigma), fmt_f64(p.omega), fmt_f64(k)])?;
        }
    }
    w.flush()
}
