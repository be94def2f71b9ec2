//! Human-readable design dumps.

use std::fmt::Write;

use maqd_core::design::{DecoderDesign, RegionDesign};

/// Thresholds of every used region per iteration, one row per
/// `(iteration, region)`: `iteration,region,b1,b2,...`. Iterations count
/// from 1.
pub fn boundary_table(d: &DecoderDesign, region: Option<usize>) -> String {
    let levels = d
        .iterations
        .first()
        .and_then(|it| it.first())
        .map_or(0, |r| r.quantizer.thresholds().len());
    let mut out = String::from("iteration,region");
    for j in 1..=levels {
        write!(out, ",b{j}").unwrap();
    }
    out.push('\n');
    for (i, regions) in d.iterations.iter().enumerate() {
        for (r, rd) in regions.iter().enumerate() {
            if !rd.used || region.is_some_and(|want| want != r) {
                continue;
            }
            write!(out, "{},{r}", i + 1).unwrap();
            for t in rd.quantizer.thresholds() {
                write!(out, ",{t}").unwrap();
            }
            out.push('\n');
        }
    }
    out
}

fn side_description(rd: &RegionDesign) -> String {
    let s = rd.reconstruction.s_half();
    if s == 0 {
        "singleton (no side information)".into()
    } else {
        format!("{} symbols, s in [-{s}, {s}]", 2 * s + 1)
    }
}

/// Reconstruction table of one region as a grid with `t` down and `s`
/// across.
pub fn reconstruction_grid(rd: &RegionDesign) -> String {
    let rt = &rd.reconstruction;
    let (th, sh) = (rt.t_half(), rt.s_half());
    let mut out = String::from("   t\\s");
    for s in -sh..=sh {
        write!(out, "{s:>6}").unwrap();
    }
    out.push('\n');
    for t in (-th..=th).filter(|&t| t != 0) {
        write!(out, "{t:>6}").unwrap();
        for s in -sh..=sh {
            write!(out, "{:>6}", rt.get(t, s)).unwrap();
        }
        out.push('\n');
    }
    if let Some(m) = &rd.merge {
        let shape = m.shape();
        writeln!(
            out,
            "merge: side labels up to {}, merged labels up to {}, next side labels up to {}",
            shape.side_half, shape.upsilon_half, shape.psi_half
        )
        .unwrap();
        for u in (-shape.upsilon_half..=shape.upsilon_half).filter(|&u| u != 0) {
            writeln!(out, "  u {u:>3}: psi {:>3} phi {:>5}", m.psi(u), m.phi(u)).unwrap();
        }
    }
    out
}

/// Summary, channel quantizer, boundary table and the tables of the
/// selected region (or region 0) in the first and last iteration.
pub fn inspect(d: &DecoderDesign, region: Option<usize>) -> String {
    let h = &d.header;
    let mut out = String::new();
    writeln!(
        out,
        "code {} z={} rate={} | {} {} {}-aligned | w={} w_ch={} w'={} | {} iterations | design Eb/N0 {} dB | seed {}",
        &h.code_hash[..h.code_hash.len().min(12)],
        h.z,
        h.rate,
        h.schedule,
        h.variant,
        h.alignment,
        h.msg_width,
        h.channel_width,
        h.llr_width,
        h.max_iter,
        h.design_ebn0,
        h.seed
    )
    .unwrap();
    writeln!(
        out,
        "channel: scale {} thresholds {:?} reconstruction {:?}",
        d.channel.scale(),
        d.channel.thresholds(),
        d.channel.reconstruction()
    )
    .unwrap();
    let r = region.unwrap_or(0);
    if let Some(first) = d.iterations.first().and_then(|it| it.get(r)) {
        writeln!(
            out,
            "side information in iteration 1: {}",
            side_description(first)
        )
        .unwrap();
    }
    if let Some(last) = d.iterations.last().and_then(|it| it.get(r)) {
        writeln!(
            out,
            "side information in later iterations: {}",
            side_description(last)
        )
        .unwrap();
    }
    out.push_str("\nboundaries\n");
    out.push_str(&boundary_table(d, region));
    for (i, regions) in d.iterations.iter().enumerate() {
        if i != 0 && i + 1 != d.iterations.len() {
            continue;
        }
        if let Some(rd) = regions.get(r) {
            writeln!(
                out,
                "\niteration {} region {r}{}",
                i + 1,
                if rd.used { "" } else { " (unused)" }
            )
            .unwrap();
            out.push_str(&reconstruction_grid(rd));
        }
    }
    out
}
