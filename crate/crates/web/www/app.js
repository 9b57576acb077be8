import init, { resonances, laser, spacings } from "./pkg/chaotic_cavity_web.js";

const $ = (id) => document.getElementById(id);
const canvas = $("plot");
const ctx = canvas.getContext("2d");
let view = "resonances";

function num(id) {
  return Number($(id).value);
}

function axes(xr, yr, xlabel, ylabel, logY = false) {
  const pad = { l: 110, r: 30, t: 30, b: 80 };
  const w = canvas.width - pad.l - pad.r;
  const h = canvas.height - pad.t - pad.b;
  const ty = (y) => (logY ? Math.log10(y) : y);
  const [y0, y1] = [ty(yr[0]), ty(yr[1])];
  const px = (x) => pad.l + ((x - xr[0]) / (xr[1] - xr[0])) * w;
  const py = (y) => pad.t + h - ((ty(y) - y0) / (y1 - y0)) * h;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#444";
  ctx.lineWidth = 2;
  ctx.strokeRect(pad.l, pad.t, w, h);
  ctx.fillStyle = "#222";
  ctx.font = "28px system-ui";
  ctx.textAlign = "center";
  for (let i = 0; i <= 4; i++) {
    const x = xr[0] + ((xr[1] - xr[0]) * i) / 4;
    ctx.fillText(x.toPrecision(3), px(x), pad.t + h + 34);
  }
  ctx.fillText(xlabel, pad.l + w / 2, canvas.height - 12);
  ctx.textAlign = "right";
  for (let i = 0; i <= 4; i++) {
    const t = y0 + ((y1 - y0) * i) / 4;
    const y = logY ? 10 ** t : t;
    ctx.fillText(y.toPrecision(3), pad.l - 10, py(y) + 9);
  }
  ctx.save();
  ctx.translate(28, pad.t + h / 2);
  ctx.rotate(-Math.PI / 2);
  ctx.textAlign = "center";
  ctx.fillText(ylabel, 0, 0);
  ctx.restore();
  return { px, py };
}

function line(xs, ys, t, color, width = 3) {
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  xs.forEach((x, i) => (i ? ctx.lineTo(t.px(x), t.py(ys[i])) : ctx.moveTo(t.px(x), t.py(ys[i]))));
  ctx.stroke();
}

function range(v) {
  const lo = Math.min(...v);
  const hi = Math.max(...v);
  const d = hi > lo ? 0.05 * (hi - lo) : 1;
  return [lo - d, hi + d];
}

function drawResonances(r) {
  const kmax = Math.max(...r.petermann);
  const wr = [Math.min(...r.width) * 0.8, Math.max(...r.width) * 1.2];
  const t = axes(range(r.detuning), wr, "ω_k − ω₀ (units of Δω)", "γ_k", true);
  r.detuning.forEach((x, k) => {
    const s = Math.min(1, Math.log(r.petermann[k]) / Math.log(Math.max(kmax, 1.0001)));
    ctx.fillStyle = `rgb(${Math.round(40 + 200 * s)}, 60, ${Math.round(200 - 150 * s)})`;
    ctx.beginPath();
    ctx.arc(t.px(x), t.py(r.width[k]), k === r.narrowest ? 14 : 8, 0, 2 * Math.PI);
    ctx.fill();
  });
  const i = r.narrowest;
  return [
    `overlap ratio ⟨γ⟩/Δω = ${r.overlap_ratio.toPrecision(4)}`,
    `narrowest mode ${i}: γ = ${r.width[i].toPrecision(4)}, K = ${r.petermann[i].toPrecision(5)}`,
    `max K = ${kmax.toPrecision(5)}  (colour: blue K≈1, red K = max; large dot: narrowest)`,
  ].join("\n");
}

function drawLaser(l) {
  const t = axes(range(l.grid), [0, 1.05], "(ω − ω̄) / δω", "S(ω) / S(ω̄)");
  const lorentz = l.grid.map((u) => 1 / (1 + u * u));
  line(l.grid, lorentz, t, "#bbb", 8);
  line(l.grid, l.spectrum, t, "#c33");
  return [
    `lasing mode ${l.mode_index}, ω̄ − ω₀ = ${l.detuning.toPrecision(6)}`,
    `threshold gain G* = ${l.gain_star.toPrecision(6)}, intensity I = ${l.intensity.toPrecision(5)}`,
    `Petermann K = ${l.petermann.toPrecision(6)}`,
    `δω_ST = ${l.schawlow_townes.toExponential(4)}, δω = K δω_ST = ${l.linewidth.toExponential(4)}`,
    `fitted half-width = ${l.fitted_half_width === null ? "n/a" : l.fitted_half_width.toExponential(4)}`,
    `zero-mode weight = ${l.zero_mode_weight.toFixed(6)}  (grey: unit Lorentzian)`,
  ].join("\n");
}

function drawSpacings(s) {
  const centres = s.density.map((_, i) => 0.5 * (s.bin_edges[i] + s.bin_edges[i + 1]));
  const ymax = Math.max(...s.density, ...s.wigner, ...s.poisson) * 1.05;
  const t = axes([0, s.bin_edges[s.bin_edges.length - 1]], [0, ymax], "s / ⟨s⟩", "P(s)");
  const bw = t.px(s.bin_edges[1]) - t.px(s.bin_edges[0]);
  ctx.fillStyle = "#9bc";
  s.density.forEach((d, i) => {
    ctx.fillRect(t.px(s.bin_edges[i]), t.py(d), bw - 1, t.py(0) - t.py(d));
  });
  line(centres, s.wigner, t, "#c33");
  line(centres, s.poisson, t, "#393");
  return [
    `${s.n_spacings} spacings`,
    `KS p-value vs Wigner (red): ${s.wigner_p.toPrecision(3)}`,
    `KS p-value vs Poisson (green): ${s.poisson_p.toPrecision(3)}`,
  ].join("\n");
}

function run() {
  const info = $("info");
  info.className = "";
  const n = num("n");
  const seed = BigInt(Math.max(0, Math.floor(num("seed"))));
  try {
    if (view === "resonances") {
      info.textContent = drawResonances(JSON.parse(resonances(n, num("m"), num("x"), seed)));
    } else if (view === "laser") {
      info.textContent = drawLaser(JSON.parse(laser(n, num("m"), num("x"), seed, num("pump"))));
    } else {
      info.textContent = drawSpacings(JSON.parse(spacings(n, num("reps"), seed, 40)));
    }
  } catch (e) {
    info.className = "error";
    info.textContent = String(e.message ?? e);
  }
}

function select(v) {
  view = v;
  document.querySelectorAll("nav button").forEach((b) => b.classList.toggle("active", b.dataset.view === v));
  document.querySelectorAll("label.laser").forEach((l) => (l.style.display = v === "laser" ? "" : "none"));
  document.querySelectorAll("label.spacings").forEach((l) => (l.style.display = v === "spacings" ? "" : "none"));
  run();
}

await init();
document.querySelectorAll("nav button").forEach((b) => b.addEventListener("click", () => select(b.dataset.view)));
$("run").addEventListener("click", run);
select("resonances");
