use dvvkit::baselines::VvReplica;
use dvvkit::kvstore::ReplicaNode;
use dvvkit::ReplicaId;
use std::fmt::Write as _;

/// Two clients read an empty key through server `a`, both write blind, then
/// one reads the siblings back and writes a value that supersedes both.
/// The per-server vector store runs alongside for contrast.
pub fn walkthrough() -> String {
    let a = ReplicaId::new("a").expect("valid id");
    let mut dvv = ReplicaNode::new(a.clone());
    let mut per_server = VvReplica::new(a);
    let key = b"k";
    let mut out = String::new();

    let (_, c1_ctx) = dvv.get(key);
    let (_, c2_ctx) = dvv.get(key);
    let (_, c1_vv) = per_server.get(key);
    let (_, c2_vv) = per_server.get(key);
    let _ = writeln!(
        out,
        "step 1: c1 and c2 GET k at a -> no values, context {c1_ctx}"
    );

    let clock = dvv.put(key, b"v1".to_vec(), &c1_ctx);
    per_server.server_vv_put(key, b"v1".to_vec(), &c1_vv);
    let _ = writeln!(
        out,
        "step 2: c1 PUT v1 with context {c1_ctx} -> a mints {clock}"
    );
    siblings(&mut out, &dvv, &per_server);

    let clock = dvv.put(key, b"v2".to_vec(), &c2_ctx);
    let w = per_server.server_vv_put(key, b"v2".to_vec(), &c2_vv);
    let _ = writeln!(
        out,
        "step 3: c2 PUT v2 with context {c2_ctx} -> a mints {clock}"
    );
    siblings(&mut out, &dvv, &per_server);
    for lost in &w.discarded {
        let _ = writeln!(
            out,
            "        per-server vector {} overwrote {} {} although c2 never saw it",
            w.clock,
            String::from_utf8_lossy(&lost.value),
            lost.clock
        );
    }

    let (values, ctx) = dvv.get(key);
    let shown: Vec<_> = values
        .iter()
        .map(|v| String::from_utf8_lossy(v).into_owned())
        .collect();
    let (_, vv_ctx) = per_server.get(key);
    let _ = writeln!(
        out,
        "step 4: c1 GET k at a -> values [{}], context {ctx}",
        shown.join(", ")
    );

    let clock = dvv.put(key, b"v3".to_vec(), &ctx);
    per_server.server_vv_put(key, b"v3".to_vec(), &vv_ctx);
    let _ = writeln!(
        out,
        "step 5: c1 PUT v3 with context {ctx} -> a mints {clock}"
    );
    siblings(&mut out, &dvv, &per_server);
    out
}

fn siblings(out: &mut String, dvv: &ReplicaNode, per_server: &VvReplica) {
    let state = dvv.key_state(b"k").expect("key written");
    let list: Vec<String> = state
        .canonical()
        .iter()
        .map(|v| format!("{}={}", String::from_utf8_lossy(&v.value), v.clock))
        .collect();
    let _ = writeln!(
        out,
        "        dvv siblings ({}): {}",
        state.len(),
        list.join(" ")
    );
    let sibs = per_server.siblings(b"k");
    let list: Vec<String> = sibs
        .iter()
        .map(|v| format!("{}={}", String::from_utf8_lossy(&v.value), v.clock))
        .collect();
    let _ = writeln!(
        out,
        "        per-server siblings ({}): {}",
        sibs.len(),
        list.join(" ")
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(text: &str, n: usize) -> String {
        let prefix = format!("step {n}:");
        let mut lines = text.lines().skip_while(|l| !l.starts_with(&prefix));
        let mut out = vec![lines.next().expect("step present").to_owned()];
        out.extend(
            lines
                .take_while(|l| !l.starts_with("step "))
                .map(str::to_owned),
        );
        out.join("\n")
    }

    #[test]
    fn walkthrough_shows_concurrent_siblings_then_reconciliation() {
        let text = walkthrough();
        assert!(step(&text, 2).contains("((a,1),{})"));
        let s3 = step(&text, 3);
        assert!(s3.contains("((a,2),{})"));
        assert!(s3.contains("dvv siblings (2)"));
        assert!(s3.contains("per-server siblings (1)"));
        let s5 = step(&text, 5);
        assert!(s5.contains("dvv siblings (1): v3=((a,3),{a:2})"));
    }
}
