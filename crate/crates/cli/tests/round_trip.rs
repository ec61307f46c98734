use diaggate_cli::dataset::{Dataset, RunManifest, Value};
use proptest::prelude::*;

fn cell(ty: u8) -> BoxedStrategy<Value> {
    let v = match ty {
        0 => any::<i64>().prop_map(Value::Int).boxed(),
        1 => prop_oneof![any::<f64>().prop_filter("finite", |x| x.is_finite()), -1e3..1e3f64]
            .prop_map(Value::Float)
            .boxed(),
        2 => "[ -~\n\"',]{1,12}".prop_map(Value::Text).boxed(),
        _ => any::<bool>().prop_map(Value::Bool).boxed(),
    };
    prop_oneof![9 => v, 1 => Just(Value::Null)].boxed()
}

fn dataset() -> impl Strategy<Value = Dataset> {
    (prop::collection::vec(0u8..4, 1..5), 0usize..6, any::<u64>(), -1e6..1e6f64).prop_flat_map(
        |(types, rows, seed, stat)| {
            let row = types.iter().map(|&t| cell(t)).collect::<Vec<_>>();
            prop::collection::vec(row, rows).prop_map(move |rows| {
                let names: Vec<String> = (0..types.len()).map(|i| format!("c{i}")).collect();
                let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                let manifest = RunManifest::new("prop", Some(seed)).param("stat", stat).param("label", "x,y");
                let mut d = Dataset::new(manifest, &refs);
                d.summarize("stat", stat);
                for r in rows {
                    d.push(r);
                }
                // Blank CSV cells are typed by the first non-null entry of their column.
                for c in 0..types.len() {
                    if let Some(first) = d.rows.iter().map(|r| &r[c]).find(|v| **v != Value::Null).cloned() {
                        for r in d.rows.iter_mut() {
                            if std::mem::discriminant(&r[c]) != std::mem::discriminant(&first) {
                                r[c] = Value::Null;
                            }
                        }
                    }
                }
                d
            })
        },
    )
}

proptest! {
    #[test]
    fn jsonl_round_trips(d in dataset()) {
        prop_assert_eq!(d.to_jsonl().parse::<Dataset>().unwrap(), d);
    }

    #[test]
    fn csv_round_trips(d in dataset()) {
        prop_assert_eq!(d.to_csv().parse::<Dataset>().unwrap(), d);
    }
}
