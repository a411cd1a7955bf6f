import init, { classify_table, check_figure, exact_excess } from "./pkg/coaction_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const show = (id, text) => { $(id).textContent = JSON.stringify(JSON.parse(text), null, 2); };

// The worked example with a three-level A.
const example = {
  domains: { A: [0, 1, 2], B: [0, 1] },
  table: [0, 0, 0, 1, 1, 1],
};

await init();
$("table").value = JSON.stringify(example, null, 2);
$("classify").onclick = () => show("classify-out", classify_table($("table").value));
$("check").onclick = () => show("check-out", check_figure($("figure").value, $("context").value));
$("excess").onclick = () => show("excess-out", exact_excess(
  Number($("pattern").value), Number($("pa").value), Number($("pb").value), Number($("pu").value)));
