// Glue generated by `wasm-bindgen --target web` lives in ./pkg.
import init, { exploreChain, costAndDeltas, TreePlayground } from "./pkg/tabref_web.js";

const $ = (id) => document.getElementById(id);

function fail(target, e) {
  target.innerHTML = "";
  const p = document.createElement("p");
  p.className = "err";
  p.textContent = e.message ?? String(e);
  target.appendChild(p);
}

function showChain() {
  const target = $("chain-out");
  try {
    const view = JSON.parse(exploreChain($("table").value, $("chain").value));
    target.innerHTML = "";
    const blocks = [["original", view.original], ...view.steps.map((s) => [`step ${s.step}: ${s.call}`, s.table])];
    for (const [title, table] of blocks) {
      const h = document.createElement("h3");
      h.textContent = title;
      const pre = document.createElement("pre");
      pre.textContent = table;
      target.append(h, pre);
    }
    if (view.error) fail(target.appendChild(document.createElement("div")), new Error(`step ${view.error.step}: ${view.error.message}`));
  } catch (e) {
    fail(target, e);
  }
}

let tree;
const log = [];

function refreshTree(entry) {
  if (entry) log.unshift(entry);
  $("tree-out").textContent = tree.inspect();
  $("tree-log").textContent = log.slice(0, 12).join("\n");
}

function treeAction(fn) {
  try {
    refreshTree(fn());
  } catch (e) {
    refreshTree(`error: ${e.message ?? e}`);
  }
}

function calc() {
  try {
    const r = JSON.parse(costAndDeltas(
      Number($("in").value), Number($("out").value),
      Number($("bin").value), Number($("bout").value),
      $("bo").value, $("to").value,
    ));
    const d = r.deltas;
    $("calc-out").textContent = [
      `weighted cost      ${r.weighted.toFixed(3)}`,
      `baseline weighted  ${r.baseline_weighted.toFixed(3)}`,
      `ratio              ${r.ratio === null ? "n/a" : r.ratio.toFixed(3)}`,
      `corrected          ${d.corrected} (${d.correction_pct.toFixed(1)}%)`,
      `degraded           ${d.degraded} (${d.degradation_pct.toFixed(1)}%)`,
      `net change         ${d.net_pct >= 0 ? "+" : ""}${d.net_pct.toFixed(1)}`,
    ].join("\n");
  } catch (e) {
    $("calc-out").textContent = `error: ${e.message ?? e}`;
  }
}

await init();
tree = new TreePlayground();
refreshTree();

$("run-chain").onclick = showChain;
$("tree-add").onclick = () => treeAction(() => tree.add($("route").value));
$("tree-split").onclick = () => treeAction(() => tree.split($("route").value, $("list1").value, $("list2").value));
$("tree-branch").onclick = () => treeAction(() => tree.branch($("route").value));
$("tree-sample").onclick = () => treeAction(() => {
  const picked = JSON.parse(tree.sample($("route").value, BigInt($("seed").value || 0)));
  return "sampled: " + picked.map((t) => `#${t.created_at} ${t.question}`).join(", ");
});
$("tree-reset").onclick = () => { tree.free(); tree = new TreePlayground(); log.length = 0; refreshTree(); };
$("calc").onclick = calc;
showChain();
calc();
