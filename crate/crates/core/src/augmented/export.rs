//! CSV export of solved tables and policies.
//!
//! Value tables: `stage,state,s,value,greedy_action`, where `stage` counts the
//! stages to go and `greedy_action` is the minimiser that produced the value
//! (empty for the terminal table). Policies: `time,state,s,action` with `time`
//! the decision time. Numbers use Rust's shortest round-trip formatting.

use std::io::{self, Write};

use super::{AugmentedTables, AvarSolution};

pub const VALUE_CSV_HEADER: &str = "stage,state,s,value,greedy_action";
pub const POLICY_CSV_HEADER: &str = "time,state,s,action";

pub fn write_value_tables_csv<W: Write>(out: &mut W, solution: &AvarSolution) -> io::Result<()> {
    writeln!(out, "{VALUE_CSV_HEADER}")?;
    match &solution.tables {
        AugmentedTables::Finite(f) => {
            let horizon = f.horizon();
            for (stage, table) in f.tables.iter().enumerate() {
                let grid = table.grid();
                for x in 0..table.state_count() {
                    for i in 0..grid.len() {
                        let action = (stage > 0)
                            .then(|| f.policy.action_at(horizon - stage, x, i))
                            .flatten();
                        write_value_row(out, stage, x, grid.point(i), table.value(x, i), action)?;
                    }
                }
            }
        }
        AugmentedTables::Infinite(inf) => {
            let table = &inf.table;
            let grid = table.grid();
            for x in 0..table.state_count() {
                for i in 0..grid.len() {
                    let action = inf.policy.action_at(0, x, i);
                    write_value_row(
                        out,
                        table.stage(),
                        x,
                        grid.point(i),
                        table.value(x, i),
                        action,
                    )?;
                }
            }
        }
    }
    Ok(())
}

fn write_value_row<W: Write>(
    out: &mut W,
    stage: usize,
    state: usize,
    s: f64,
    value: f64,
    action: Option<usize>,
) -> io::Result<()> {
    match action {
        Some(a) => writeln!(out, "{stage},{state},{s},{value},{a}"),
        None => writeln!(out, "{stage},{state},{s},{value},"),
    }
}

pub fn write_policy_csv<W: Write>(out: &mut W, solution: &AvarSolution) -> io::Result<()> {
    writeln!(out, "{POLICY_CSV_HEADER}")?;
    let policy = solution.policy();
    let grid = policy.grid();
    let states = solution.value_table().state_count();
    for time in 0..policy.stage_count() {
        for x in 0..states {
            for i in 0..grid.len() {
                if let Some(a) = policy.action_at(time, x, i) {
                    writeln!(out, "{time},{x},{},{a}", grid.point(i))?;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augmented::{solve_avar, Horizon, SolveOptions};
    use crate::mdp::FiniteMdp;
    use crate::risk::RiskLevel;

    #[test]
    fn value_csv_layout() {
        let mdp = FiniteMdp::builder(1, 1)
            .action(0, 0, 1.0, &[(0, 1.0)])
            .build()
            .unwrap();
        let options = SolveOptions {
            margin: 0.0,
            ..Default::default()
        };
        let sol = solve_avar(
            &mdp,
            0,
            Horizon::Finite(1),
            RiskLevel::new(0.5).unwrap(),
            &options,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_value_tables_csv(&mut buf, &sol).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "stage,state,s,value,greedy_action\n0,0,0,0,\n0,0,1,0,\n1,0,0,1,0\n1,0,1,0,0\n"
        );

        let mut buf = Vec::new();
        write_policy_csv(&mut buf, &sol).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "time,state,s,action\n0,0,0,0\n0,0,1,0\n"
        );
    }
}
