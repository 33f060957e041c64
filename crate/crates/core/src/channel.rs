//! Parametric wireless and ideal communication channels, used as examples
//! and benchmarks.

use num_traits::One;

use crate::model::{Alphabet, Cpa, Distribution, Rational, Transition};

/// A lossy multi-hop channel for the given messages. For message `m`,
/// `s -send_m-> m0`, then `n` hops `mi -hop-> {m(i+1): p, mi: 1-p}` of cost
/// `r²` each, and `mn -recv_m-> s`. Sending and receiving cost 1. With a
/// single message the actions are plain `send` and `recv`.
pub fn wireless_channel(messages: &[&str], n: usize, r: &Rational, p: &Rational) -> Cpa {
    assert!(*p > Rational::from_integer(0.into()) && *p <= Rational::one(), "p must lie in (0, 1]");
    let single = messages.len() == 1;
    let mut states = vec!["s".to_string()];
    let mut external = Vec::new();
    let mut transitions = Vec::new();
    let hop_cost = r * r;
    for m in messages {
        let (send, recv) = if single {
            ("send".to_string(), "recv".to_string())
        } else {
            (format!("send_{m}"), format!("recv_{m}"))
        };
        let base = states.len();
        let prefix = if single { "h".to_string() } else { format!("h{m}_") };
        states.extend((0..=n).map(|i| format!("{prefix}{i}")));
        transitions.push(Transition {
            source: 0,
            action: send.clone(),
            target: Distribution::dirac(base),
            cost: Rational::one(),
        });
        for i in 0..n {
            let target = Distribution::from_pairs([(base + i + 1, p.clone()), (base + i, Rational::one() - p)])
                .expect("valid hop distribution");
            transitions.push(Transition {
                source: base + i,
                action: "hop".into(),
                target,
                cost: hop_cost.clone(),
            });
        }
        transitions.push(Transition {
            source: base + n,
            action: recv.clone(),
            target: Distribution::dirac(0),
            cost: Rational::one(),
        });
        external.push(send);
        external.push(recv);
    }
    Cpa::new(
        format!("wcc_{n}_{r}"),
        states,
        0,
        Alphabet::new(external, vec!["hop".into()]),
        transitions,
    )
    .expect("channel construction is valid")
}

/// The ideal channel: `s -send-> h0 -recv-> s`, both steps of cost 1.
pub fn ideal_channel() -> Cpa {
    Cpa::new(
        "icc",
        vec!["s".into(), "h0".into()],
        0,
        Alphabet::new(vec!["send".into(), "recv".into()], vec![]),
        vec![
            Transition {
                source: 0,
                action: "send".into(),
                target: Distribution::dirac(1),
                cost: Rational::one(),
            },
            Transition {
                source: 1,
                action: "recv".into(),
                target: Distribution::dirac(0),
                cost: Rational::one(),
            },
        ],
    )
    .expect("channel construction is valid")
}
