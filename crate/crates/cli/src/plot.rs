use std::fmt::Write as _;

use declfc_core::model::{AREA_STATES, STATE_FREQ, STATE_TIE};

/// Gnuplot script drawing Δf_i and ΔP_tie,i from one or two trajectory CSVs.
pub fn gnuplot_script(n_areas: usize, files: &[(&str, &str)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# declfc plot format-version 1");
    let _ = writeln!(s, "# run: gnuplot plot.gp");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set terminal pngcairo size 1000,{}", 300 * n_areas);
    let _ = writeln!(s, "set xlabel 'time (s)'");
    let _ = writeln!(s, "set grid");
    for (out, state, label) in [("frequency.png", STATE_FREQ, "df (Hz)"), ("tieline.png", STATE_TIE, "dPtie (p.u.)")] {
        let _ = writeln!(s, "\nset output '{out}'");
        let _ = writeln!(s, "set multiplot layout {n_areas},1");
        for i in 0..n_areas {
            // column 1 is time; area i's states start at column 2 + 5i
            let col = 2 + i * AREA_STATES + state;
            let _ = writeln!(s, "set ylabel '{label} area {}'", i + 1);
            let curves: Vec<String> = files
                .iter()
                .map(|(file, title)| format!("'{file}' using 1:{col} every ::1 with lines title '{title}'"))
                .collect();
            let _ = writeln!(s, "plot {}", curves.join(", "));
        }
        let _ = writeln!(s, "unset multiplot");
    }
    s
}
