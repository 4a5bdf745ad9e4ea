//! CSV traces of closed-loop runs.

use std::fmt::Display;
use std::io::{Read, Write};

use symctl_core::case::CaseState;
use symctl_core::simulate::Record;
use symctl_core::Dec;

use crate::error::{CliError, Result};

pub const CASE_HEADER: [&str; 14] = [
    "k", "xi1", "xi2", "xi3", "xi4", "yc", "y", "u", "uc", "drop_cp", "drop_pc", "n_obs", "n_ctrl", "bound",
];

pub const GENERIC_HEADER: [&str; 8] = ["k", "x", "y", "u", "uc", "n_obs", "n_ctrl", "bound"];

fn bit(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn write_case<W: Write>(out: W, trace: &[Record<CaseState, Dec, Dec, i64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CASE_HEADER)?;
    for r in trace {
        let x = &r.state;
        w.write_record([
            r.k.to_string(),
            x.xi1.to_string(),
            x.xi2.to_string(),
            bit(x.xi3).into(),
            bit(x.xi4).into(),
            x.yc().to_string(),
            r.output.to_string(),
            r.input.to_string(),
            r.spec_input.to_string(),
            bit(x.xi3).into(),
            bit(x.xi4).into(),
            r.n_obs.to_string(),
            r.n_ctrl.to_string(),
            r.bound.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_generic<W, X, U, Uc, Y>(out: W, trace: &[Record<X, U, Uc, Y>]) -> Result<()>
where
    W: Write,
    X: Display,
    U: Display,
    Uc: Display,
    Y: Display,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(GENERIC_HEADER)?;
    for r in trace {
        w.write_record([
            r.k.to_string(),
            r.state.to_string(),
            r.output.to_string(),
            r.input.to_string(),
            r.spec_input.to_string(),
            r.n_obs.to_string(),
            r.n_ctrl.to_string(),
            r.bound.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// One parsed row of a built-in example trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseRow {
    pub k: usize,
    pub state: CaseState,
    pub yc: Dec,
    pub y: i64,
    pub u: Dec,
    pub uc: Dec,
    pub n_obs: usize,
    pub n_ctrl: usize,
    pub bound: Dec,
}

pub fn read_case<R: Read>(input: R) -> Result<Vec<CaseRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(String::from).collect();
    if header != CASE_HEADER {
        return Err(CliError::format("trace", format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let f = |j: usize| rec.get(j).unwrap_or_default();
        let bad = |j: usize| CliError::format("trace", format!("line {line}: bad {} {:?}", CASE_HEADER[j], f(j)));
        let dec = |j: usize| f(j).parse::<Dec>().map_err(|_| bad(j));
        let int = |j: usize| f(j).parse::<usize>().map_err(|_| bad(j));
        let flag = |j: usize| match f(j) {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(bad(j)),
        };
        let state = CaseState::new(dec(1)?, dec(2)?, flag(3)?, flag(4)?);
        if flag(9)? != state.xi3 || flag(10)? != state.xi4 {
            return Err(CliError::format("trace", format!("line {line}: dropout flags disagree with the state")));
        }
        rows.push(CaseRow {
            k: int(0)?,
            state,
            yc: dec(5)?,
            y: f(6).parse().map_err(|_| bad(6))?,
            u: dec(7)?,
            uc: dec(8)?,
            n_obs: int(11)?,
            n_ctrl: int(12)?,
            bound: dec(13)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use symctl_core::case;
    use symctl_core::simulate::{no_consecutive_drops, run, Channel, Dropouts};

    #[test]
    fn case_traces_round_trip() {
        let obs = case::observer(0).unwrap();
        let ctl = case::controller(&obs);
        let tr = run(&ctl, &case::CasePlant::new(), &case::oabs_relation(), &mut Channel::new(Dropouts::Seeded(3)), 3).unwrap();
        let mut buf = Vec::new();
        write_case(&mut buf, &tr).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("k,xi1,xi2,xi3,xi4,yc,y,u,uc,drop_cp,drop_pc,n_obs,n_ctrl,bound\n"));
        let rows = read_case(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), 4);
        for (row, r) in rows.iter().zip(&tr) {
            assert_eq!((row.k, row.state, row.y, row.u, row.n_obs), (r.k, r.state, r.output, r.input, r.n_obs));
            assert_eq!(row.yc, r.state.yc());
        }
        let states: Vec<CaseState> = rows.iter().map(|r| r.state).collect();
        assert!(no_consecutive_drops(&states));
    }

    #[test]
    fn mismatched_flags_are_rejected() {
        let text = "k,xi1,xi2,xi3,xi4,yc,y,u,uc,drop_cp,drop_pc,n_obs,n_ctrl,bound\n0,0,0,0,0,0,0,0.064,0.064,1,0,1,1,0.05\n";
        assert!(read_case(text.as_bytes()).is_err());
    }
}
