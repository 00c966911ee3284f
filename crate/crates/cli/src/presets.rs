//! Built-in desk-scale experiment configs.

pub const FIG3_SID: &str = "\
# SID spread of a control-plane fault over a 10-node ring backbone.
[topology]
generator = ring 10
seed = 0
[model]
model = SID
beta = 0.4
delta1 = 0.1
tau = 0.2
gamma = 0.05
seeds = 0
[run]
max_ticks = 200
n_runs = 100
rng_seed = 42
stop = absorb
";

pub const FIG5A_VERTICAL: &str = "\
# Two controllers backing each other up; a DoS on switch 0 overloads A,
# its switches fail over to B, and B collapses too.
[edges]
0 1
1 2
2 3
3 4
4 5
[roles]
0=edge
1=edge
2=edge
3=edge
4=edge
5=edge
A=controller
B=controller
[controllers]
0:A,B
1:A,B
2:A,B
3:B,A
4:B,A
5:B,A
[scenario]
kind = vertical
[capacity]
A=100
B=100
[rate]
0=10
1=10
2=10
3=10
4=10
5=10
[attack]
0=150
";

pub const FIG5B_HORIZONTAL: &str = "\
# Traffic injected at edge switch 0 towards edge switch 4 through three
# commodity core switches.
[edges]
0 1
1 2
2 3
3 4
[roles]
0=edge
1=core
2=core
3=core
4=edge
[scenario]
kind = horizontal
[capacity]
1=10
2=10
3=10
[injection]
0,4,20
";

pub const FIG5B_PARALLEL: &str = "\
# Two disjoint core paths between edge switches 0 and 5; the injected flow
# kills the first path, reroutes, and kills the second.
[edges]
0 1
1 2
2 5
0 3
3 4
4 5
[roles]
0=edge
5=edge
1=core
2=core
3=core
4=core
[scenario]
kind = horizontal
[capacity]
1=10
2=10
3=10
4=10
[injection]
0,5,15
";

pub const PRESETS: [(&str, &str); 4] = [
    ("fig3-sid", FIG3_SID),
    ("fig5a-vertical", FIG5A_VERTICAL),
    ("fig5b-horizontal", FIG5B_HORIZONTAL),
    ("fig5b-parallel", FIG5B_PARALLEL),
];

pub fn lookup(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}
