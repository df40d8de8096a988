//! Learns a labelled vector file in order and prints the adapt log and the final knowledge base.

use flare_core::format::{parse_schema, parse_vectors, write_kb};
use flare_core::{learn_as, KnowledgeBase, ReasonConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).ok_or("usage: replay <file>")?;
    let text = std::fs::read_to_string(path)?;
    let (schema, start) = parse_schema(&text)?;
    let mut kb = KnowledgeBase::new(schema.clone());
    let cfg = ReasonConfig::default();
    for (label, v) in parse_vectors(&schema, &text, start)? {
        let t = v.target_value().ok_or("target must be asserted")?;
        let (o, r) = learn_as(&mut kb, &v, t, &cfg, label.as_deref())?;
        for line in o.trace_lines(&schema) {
            println!("  {line}");
        }
        println!("{} {}", label.as_deref().unwrap_or("-"), r.render());
    }
    print!("{}", write_kb(&kb));
    Ok(())
}
