use std::io::{self, Write};

use dnnsplit_core::units::linear_to_db;
use dnnsplit_core::SlotRecord;

pub const TRACE_HEADER: &str = "t,batch,h2,alpha_r,k,gamma_db,W,f_l,d_total,e_total,acc,Z,Y";

/// Write a per-slot trace. `gamma_db` is left empty on slots that transmit nothing.
pub fn write_trace<W: Write>(mut out: W, records: &[SlotRecord]) -> io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in records {
        write!(out, "{},{},{},{},{},", r.t, r.batch, r.channel_gain, r.alpha_r, r.k)?;
        if r.gamma > 0.0 {
            write!(out, "{}", linear_to_db(r.gamma))?;
        }
        writeln!(out, ",{},{},{},{},{},{},{}", r.bandwidth, r.f_local, r.d_total, r.e_total, r.accuracy, r.z, r.y)?;
    }
    out.flush()
}
