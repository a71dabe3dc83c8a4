import init, { run_reference, reference_beta, averaging_levels, graph_constant } from "./pkg/nvmo_web.js";

const ROW = 7;
const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function show(id, text, isError = false) {
  const el = $(id);
  el.textContent = text;
  el.classList.toggle("err", isError);
}

// Log-scale line plot of U / rho against the bound levels.
function plot(rows) {
  const canvas = $("plot");
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, L = 60, R = 130, T = 15, B = 30;
  ctx.clearRect(0, 0, W, H);
  const n = rows.length / ROW;
  const series = [
    { label: "U_p / rho_p", color: "#1f77b4", dash: [], f: (r) => r[1] / r[5] },
    { label: "bound p", color: "#1f77b4", dash: [6, 3], f: (r) => r[3] / r[5] },
    { label: "U_R / rho_R", color: "#2ca02c", dash: [], f: (r) => r[2] / r[6] },
    { label: "bound R", color: "#2ca02c", dash: [6, 3], f: (r) => r[4] / r[6] },
  ];
  const row = (i) => rows.subarray(i * ROW, (i + 1) * ROW);
  let lo = Infinity, hi = -Infinity;
  for (let i = 0; i < n; i++) {
    for (const s of series) {
      const y = s.f(row(i));
      if (y > 0 && isFinite(y)) { lo = Math.min(lo, Math.log10(y)); hi = Math.max(hi, Math.log10(y)); }
    }
  }
  lo = Math.floor(lo); hi = Math.max(Math.ceil(hi), lo + 1);
  const t1 = row(n - 1)[0] || 1;
  const sx = (t) => L + (t / t1) * (W - L - R);
  const sy = (y) => T + (hi - Math.log10(y)) / (hi - lo) * (H - T - B);
  ctx.font = "11px sans-serif";
  ctx.strokeStyle = "#ddd"; ctx.fillStyle = "#333";
  for (let e = lo; e <= hi; e++) {
    ctx.beginPath(); ctx.moveTo(L, sy(10 ** e)); ctx.lineTo(W - R, sy(10 ** e)); ctx.stroke();
    ctx.fillText(`1e${e}`, 20, sy(10 ** e) + 4);
  }
  for (let k = 0; k <= 4; k++) ctx.fillText((t1 * k / 4).toFixed(1), sx(t1 * k / 4) - 8, H - 10);
  series.forEach((s, k) => {
    ctx.strokeStyle = s.color; ctx.setLineDash(s.dash); ctx.beginPath();
    let pen = false;
    for (let i = 0; i < n; i++) {
      const r = row(i), y = s.f(r);
      if (!(y > 0 && isFinite(y))) { pen = false; continue; }
      pen ? ctx.lineTo(sx(r[0]), sy(y)) : ctx.moveTo(sx(r[0]), sy(y));
      pen = true;
    }
    ctx.stroke();
    ctx.beginPath(); ctx.moveTo(W - R + 10, T + 14 * k + 10); ctx.lineTo(W - R + 30, T + 14 * k + 10); ctx.stroke();
    ctx.fillText(s.label, W - R + 35, T + 14 * k + 14);
  });
  ctx.setLineDash([]);
}

function runSimulation() {
  const moving = document.querySelector('input[name="kind"]:checked').value === "moving";
  const dt = num("dt"), horizon = num("horizon");
  const stride = Math.max(1, Math.round(horizon / dt / 2000));
  try {
    const t0 = performance.now();
    const rows = run_reference(moving, num("ke"), num("ks"), dt, horizon, stride);
    plot(rows);
    const last = rows.subarray(rows.length - ROW);
    show("run-out",
      `t=${last[0].toFixed(3)}  U_p/rho_p=${(last[1] / last[5]).toExponential(3)}  ` +
      `U_R/rho_R=${(last[2] / last[6]).toExponential(3)}  (${(performance.now() - t0).toFixed(0)} ms)`);
  } catch (e) {
    show("run-out", String(e), true);
  }
}

function updateLevels() {
  try {
    const beta = reference_beta(num("lc"));
    const [p, r] = averaging_levels(num("lk-e"), num("lk-s"), num("lw"), beta, num("leps"));
    show("levels-out", `beta=${beta.toFixed(5)}  eps_p=${p.toFixed(4)}  eps_R=${r.toFixed(4)}`);
  } catch (e) {
    show("levels-out", String(e), true);
  }
}

function computeGraph() {
  try {
    const g = JSON.parse(graph_constant(num("gn"), $("gedges").value));
    const edges = g.edges.map((e) => `${e.a}-${e.b} (load ${e.load})`).join(", ");
    show("graph-out", `W=${g.w}  root=${g.root}\ntree: ${edges}`);
  } catch (e) {
    show("graph-out", String(e), true);
  }
}

await init();
$("run").addEventListener("click", runSimulation);
$("gw").addEventListener("click", computeGraph);
for (const id of ["lk-e", "lk-s", "lw", "lc", "leps"]) $(id).addEventListener("input", updateLevels);
updateLevels();
computeGraph();
