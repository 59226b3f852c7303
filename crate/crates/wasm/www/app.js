import init, { tracking, bounds, regret } from "./pkg/iogd_wasm.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"];
const PAD = 40;

function values(form) {
  const out = {};
  for (const el of form.elements) {
    if (el.name) out[el.name] = el.value;
  }
  return out;
}

// Maps data ranges onto a canvas with a fixed margin.
function frame(canvas, xs, ys, equal) {
  const finite = (v) => v.filter(Number.isFinite);
  let [x0, x1] = [Math.min(...finite(xs)), Math.max(...finite(xs))];
  let [y0, y1] = [Math.min(...finite(ys)), Math.max(...finite(ys))];
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) y1 = y0 + 1;
  const w = canvas.width - 2 * PAD;
  const h = canvas.height - 2 * PAD;
  let sx = w / (x1 - x0);
  let sy = h / (y1 - y0);
  if (equal) sx = sy = Math.min(sx, sy);
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(PAD, PAD, w, h);
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.fillText(x0.toPrecision(3), PAD, canvas.height - PAD + 14);
  ctx.fillText(x1.toPrecision(3), canvas.width - PAD - 30, canvas.height - PAD + 14);
  ctx.fillText(y0.toPrecision(3), 2, canvas.height - PAD);
  ctx.fillText(y1.toPrecision(3), 2, PAD + 8);
  return {
    ctx,
    px: (x) => PAD + (x - x0) * sx,
    py: (y) => canvas.height - PAD - (y - y0) * sy,
  };
}

function polyline(f, pts, color, dash = []) {
  const { ctx } = f;
  ctx.strokeStyle = color;
  ctx.setLineDash(dash);
  ctx.beginPath();
  let pen = false;
  for (const [x, y] of pts) {
    if (!Number.isFinite(y)) {
      pen = false;
      continue;
    }
    if (pen) ctx.lineTo(f.px(x), f.py(y));
    else ctx.moveTo(f.px(x), f.py(y));
    pen = true;
  }
  ctx.stroke();
  ctx.setLineDash([]);
}

function legend(f, items) {
  items.forEach(([label, color], i) => {
    f.ctx.fillStyle = color;
    f.ctx.fillText(label, PAD + 8, PAD + 14 + 14 * i);
  });
}

function show(id, text, error) {
  const el = document.getElementById(id);
  el.textContent = text;
  el.className = error ? "out err" : "out";
}

function runTracking(form) {
  const v = values(form);
  const data = JSON.parse(tracking(v.scenario === "large", +v.horizon, +v.seed, +v.theta, +v.nu));
  const canvas = document.getElementById("track-canvas");
  const all = [...data.agents.flat(), ...data.targets.flat()];
  const f = frame(canvas, all.map((p) => p[0]), all.map((p) => p[1]), true);
  data.targets.forEach((path, j) => polyline(f, path, COLORS[j % COLORS.length], [4, 3]));
  data.agents.forEach((path) => polyline(f, path, "rgba(0,0,0,0.35)"));
  const last = data.targets.map((path) => path[path.length - 1]);
  last.forEach(([x, y], j) => {
    f.ctx.strokeStyle = COLORS[j % COLORS.length];
    f.ctx.beginPath();
    f.ctx.arc(f.px(x), f.py(y), (f.px(x + data.eta) - f.px(x)), 0, 2 * Math.PI);
    f.ctx.stroke();
  });
  const cover = data.coverage_fraction.map((c, j) => `target ${j + 1}: ${(100 * c).toFixed(1)}%`).join("  ");
  show("track-out", `coverage after burn-in  ${cover}\nduals nonnegative: ${data.duals_nonnegative}`);
}

function runBounds(form) {
  const v = values(form);
  const data = JSON.parse(bounds(+v.mu, +v.lipschitz, +v.nu, +v.chi, v.white === "1", +v.alpha, +v.sigma, +v.eps, +v.horizon));
  const sweep = document.getElementById("sweep-canvas");
  const ys = data.sweep.map((p) => p[1] ?? NaN);
  const f = frame(sweep, data.sweep.map((p) => p[0]), [...ys, data.chi, 0]);
  polyline(f, data.sweep.map((p) => [p[0], p[1] ?? NaN]), COLORS[0]);
  polyline(f, [[data.sweep[0][0], data.chi], [data.sweep[data.sweep.length - 1][0], data.chi]], COLORS[1], [4, 3]);
  legend(f, [["contraction factor vs step size", COLORS[0]], ["singular-value ratio", COLORS[1]]]);

  const lines = [];
  lines.push(data.interval ? `admissible step sizes: (${data.interval[0].toFixed(4)}, ${data.interval[1].toFixed(4)})` : `no admissible step size: ${data.interval_error}`);
  const canvas = document.getElementById("bound-canvas");
  canvas.getContext("2d").clearRect(0, 0, canvas.width, canvas.height);
  if (data.constants_error) {
    lines.push(data.constants_error);
  } else {
    lines.push(`contraction ${data.ell.toFixed(4)}, error gain ${data.zeta.toFixed(4)}`);
    const emp = data.empirical.map((y, k) => [k, y]);
    const series = [...data.empirical];
    if (data.bound) series.push(...data.bound);
    const g = frame(canvas, emp.map((p) => p[0]), series);
    polyline(g, emp, COLORS[2]);
    const items = [["mean distance to minimizer (40 runs)", COLORS[2]]];
    if (data.bound) {
      polyline(g, data.bound.map((y, k) => [k, y]), COLORS[3], [4, 3]);
      items.push(["tracking bound", COLORS[3]]);
      lines.push(`steady-state limit ${data.limit.toFixed(4)}`);
    } else {
      lines.push("contraction factor is not below the singular-value ratio: no tracking bound");
    }
    legend(g, items);
  }
  show("bound-out", lines.join("\n"));
}

function runRegret(form) {
  const v = values(form);
  const data = JSON.parse(regret(+v.nodes, +v.alpha, +v.horizon, +v.seeds, +v.seed));
  const canvas = document.getElementById("regret-canvas");
  const curves = [
    ["regret, sampled gradients", data.sampled.regret, COLORS[0], []],
    ["regret, exact gradients", data.exact.regret, COLORS[1], []],
    ["path length", data.sampled.path, COLORS[2], [4, 3]],
    ["error sum, sampled", data.sampled.error, COLORS[3], [4, 3]],
  ];
  const n = data.sampled.regret.length;
  const xs = Array.from({ length: n }, (_, k) => k + 1);
  const f = frame(canvas, xs, curves.flatMap((c) => c[1]));
  for (const [, ys, color, dash] of curves) polyline(f, ys.map((y, k) => [k + 1, y]), color, dash);
  legend(f, curves.map(([label, , color]) => [label, color]));
  const end = (ys) => ys[ys.length - 1].toFixed(3);
  show("regret-out", `K = ${n}: regret sampled ${end(data.sampled.regret)}, exact ${end(data.exact.regret)}; singular-value ratio ${data.chi.toFixed(3)}`);
}

function bind(id, run, out) {
  const form = document.getElementById(id);
  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    try {
      run(form);
    } catch (e) {
      show(out, String(e), true);
    }
  });
  return form;
}

await init();
const forms = [
  bind("track-form", runTracking, "track-out"),
  bind("bound-form", runBounds, "bound-out"),
  bind("regret-form", runRegret, "regret-out"),
];
for (const form of forms) form.requestSubmit();
