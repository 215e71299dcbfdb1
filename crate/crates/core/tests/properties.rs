// SPDX-License-Identifier: Apache-2.0

mod common;

use common::oracle::{simple_paths, synthetic_graph, taint_trace};
use hyperflow::annotate::annotate_from_trace;
use hyperflow::export::{read_graph, write_graph};
use hyperflow::graph::{distances_to, reachable, Time};
use hyperflow::metrics::{self, Distance, PamOptions};
use hyperflow::report::window_end;
use hyperflow::sim::{ClockSpec, Drive, Stimulus};
use hyperflow::vcd::{parse_vcd, write_vcd, WaveVar, Waveform};
use hyperflow::SignalId;
use proptest::prelude::*;

fn dag() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2usize..12).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let len = pairs.len();
        (Just(n), proptest::sample::subsequence(pairs, 0..=len.min(20)))
    })
}

fn taints(n: usize, end: Time) -> impl Strategy<Value = Vec<Vec<(Time, u64)>>> {
    proptest::collection::vec(proptest::collection::vec((0..end, 0u64..2), 0..4), n)
}

fn waveform() -> impl Strategy<Value = Waveform> {
    (2u64..60).prop_flat_map(|end| {
        let var = (1u32..=16, proptest::collection::btree_map(1..end, any::<u64>(), 0..6), any::<u64>());
        proptest::collection::vec(var, 1..6).prop_map(move |vars| {
            let vars = vars
                .into_iter()
                .enumerate()
                .map(|(i, (width, later, first))| {
                    let m = (1u64 << width) - 1;
                    let mut changes = vec![(0, first & m)];
                    for (t, v) in later {
                        if changes.last().unwrap().1 != v & m {
                            changes.push((t, v & m));
                        }
                    }
                    let scope = if i % 2 == 0 { "top" } else { "top/u1" };
                    WaveVar {
                        name: format!("{scope}/v{i}"),
                        width,
                        changes,
                    }
                })
                .collect();
            Waveform {
                timescale: "1ns".into(),
                end,
                vars,
            }
        })
    })
}

proptest! {
    #[test]
    fn reachability_agrees_with_distances((n, edges) in dag(), a in 0usize..12, b in 0usize..12) {
        let (a, b) = (SignalId((a % n) as u32), SignalId((b % n) as u32));
        let g = synthetic_graph("p", &vec![1; n], &edges);
        let d = distances_to(&g, b, false);
        prop_assert_eq!(reachable(&g, a, b, false), d[a.index()].is_some());
        prop_assert_eq!(metrics::scm(&g, a, b, false), d[a.index()].is_some());
    }

    #[test]
    fn pam_is_bounded_by_structure((n, edges) in dag(), seed in taints(12, 20), a in 0usize..12, b in 0usize..12) {
        let (a, b) = (SignalId((a % n) as u32), SignalId((b % n) as u32));
        prop_assume!(a != b);
        let g = synthetic_graph("p", &vec![1; n], &edges);
        let ga = annotate_from_trace(&g, &taint_trace(&g, 20, &seed[..n]), "p").unwrap();
        let r = metrics::pam(&ga, a, b, &PamOptions::default()).unwrap();
        prop_assert!(r.activated <= r.total);
        prop_assert_eq!(r.total, simple_paths(&ga, a, b).len());
        prop_assert_eq!(r.total > 0, metrics::scm(&ga, a, b, false));
    }

    #[test]
    fn spm_zero_iff_target_tainted((n, edges) in dag(), seed in taints(12, 10), t in 0u64..10) {
        let g = synthetic_graph("p", &vec![1; n], &edges);
        let ga = annotate_from_trace(&g, &taint_trace(&g, 10, &seed[..n]), "p").unwrap();
        let (a, b) = (SignalId(0), SignalId(n as u32 - 1));
        let d = metrics::spm(&ga, a, b, t, false).unwrap();
        prop_assert_eq!(d == Distance::Finite(0), ga.vertex(b).taint_at(t) != 0);
        if !metrics::scm(&ga, a, b, false) && ga.vertex(b).taint_at(t) == 0 {
            prop_assert_eq!(d, Distance::Infinite);
        }
    }

    #[test]
    fn annotated_graph_file_round_trips((n, edges) in dag(), seed in taints(12, 30)) {
        let g = synthetic_graph("p", &vec![1; n], &edges);
        let ga = annotate_from_trace(&g, &taint_trace(&g, 30, &seed[..n]), "p").unwrap();
        let text = write_graph(&ga);
        let back = read_graph(&text).unwrap();
        prop_assert_eq!(&back, &ga);
        prop_assert_eq!(write_graph(&back), text);
    }

    // Vars come back grouped by scope, so compare them by name.
    #[test]
    fn vcd_round_trips(mut w in waveform()) {
        let text = write_vcd(&w);
        let mut back = parse_vcd(&text).unwrap();
        back.vars.sort_by(|a, b| a.name.cmp(&b.name));
        w.vars.sort_by(|a, b| a.name.cmp(&b.name));
        prop_assert_eq!(back, w);
    }

    #[test]
    fn window_ends_are_monotone(end in 0u64..10_000, f in 0.0f64..=1.0, g in 0.0f64..=1.0) {
        let (lo, hi) = if f <= g { (f, g) } else { (g, f) };
        let (a, b) = (window_end(lo, end), window_end(hi, end));
        prop_assert!(a <= b);
        prop_assert!(a >= 1 && b <= end.max(1));
        prop_assert_eq!(window_end(1.0, end), end.max(1));
    }

    #[test]
    fn stimulus_text_round_trips(
        period in 2u64..9,
        drives in proptest::collection::vec((0u64..100, 0usize..3, 0u64..256), 0..12),
        duration in 100u64..200,
    ) {
        let mut drives: Vec<Drive> = drives
            .into_iter()
            .map(|(t, s, value)| Drive { t, signal: ["a", "b", "c"][s].into(), value })
            .collect();
        drives.sort_by_key(|d| d.t);
        let stim = Stimulus {
            clock: Some(ClockSpec { signal: "clk".into(), period }),
            drives,
            duration,
        };
        prop_assert_eq!(Stimulus::parse("s", &stim.to_text()).unwrap(), stim);
    }
}
