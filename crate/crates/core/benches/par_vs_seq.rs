use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_bigint::BigInt;

use treepres::formula::{integer_kernel, parse, Diagram, RelationLattice};
use treepres::oracle::{finite_model_check_with, FiniteModel};
use treepres::par::Exec;
use treepres::qe::{tree_decide, DecisionContext, Structure, Value};
use treepres::zp_add::PadicInt;

const MODES: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn finite_model(c: &mut Criterion) {
    // Valid, so every assignment is visited.
    let f = parse("ALL F. ALL G. ALL H. F + 2*G != H | H + G = F + 3*G").unwrap();
    let mut group = c.benchmark_group("finite_model_check");
    for (p, n) in [(2u64, 7u32), (3, 4)] {
        let m = FiniteModel::new(p, n);
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, format!("Z/{p}^{n}")), &m, |b, m| {
                b.iter(|| finite_model_check_with(exec, m, &f, &[]).unwrap())
            });
        }
    }
    group.finish();
}

fn tree_decision(c: &mut Criterion) {
    let names = ["c1", "c2", "c3"];
    let vals = [3i64, -5, 7];
    let params: Vec<(String, Value)> = names
        .iter()
        .zip(vals)
        .map(|(n, v)| (n.to_string(), Value::Padic(PadicInt::from_integer(3, v))))
        .collect();
    let cols: Vec<Vec<BigInt>> = vals.iter().map(|&v| vec![BigInt::from(v)]).collect();
    let lattice =
        RelationLattice::new(names.map(String::from).to_vec(), integer_kernel(&cols)).unwrap();
    let f = parse(
        "EX G. EX H. (c1 = 3*G + c2 | 9*H = c3 + c1) & (G != c3 | 2*H = c2) & H != c1 + c2",
    )
    .unwrap();
    let mut group = c.benchmark_group("tree_decide");
    for (name, exec) in MODES {
        let ctx = DecisionContext::new(
            Structure::ZpPlus(3),
            params.clone(),
            Diagram::Complete(lattice.clone()),
        )
        .unwrap()
        .with_exec(exec);
        group.bench_function(name, |b| b.iter(|| tree_decide(&ctx, &f).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, finite_model, tree_decision);
criterion_main!(benches);
