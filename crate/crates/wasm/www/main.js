import init, { superradiance_cascade, scaling_curve, battery_charging } from "./pkg/heatlab_wasm.js";

const PAD = 50;

function bounds(series, log) {
  let lo = Infinity, hi = -Infinity;
  for (const ys of series) {
    for (const y of ys) {
      const v = log ? Math.log10(y) : y;
      if (Number.isFinite(v)) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
    }
  }
  if (lo === hi) { lo -= 1; hi += 1; }
  return [lo, hi];
}

function plot(canvas, xs, series, colors, log = false) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height;
  ctx.clearRect(0, 0, w, h);
  const tx = log ? xs.map(Math.log10) : xs;
  const [x0, x1] = bounds([tx], false);
  const [y0, y1] = bounds(series, log);
  const sx = x => PAD + (x - x0) / (x1 - x0) * (w - 2 * PAD);
  const sy = y => h - PAD + (PAD * 2 - h) * (y - y0) / (y1 - y0);

  ctx.strokeStyle = "#888";
  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  ctx.strokeRect(PAD, PAD, w - 2 * PAD, h - 2 * PAD);
  const fmt = v => log ? "1e" + v.toFixed(1) : v.toPrecision(3);
  ctx.fillText(fmt(y0), 2, h - PAD);
  ctx.fillText(fmt(y1), 2, PAD + 10);
  ctx.fillText(fmt(x0), PAD, h - PAD + 16);
  ctx.fillText(fmt(x1), w - PAD - 30, h - PAD + 16);

  series.forEach((ys, k) => {
    ctx.strokeStyle = colors[k];
    ctx.lineWidth = 2;
    ctx.beginPath();
    ys.forEach((y, i) => {
      const v = log ? Math.log10(y) : y;
      if (i === 0) ctx.moveTo(sx(tx[i]), sy(v)); else ctx.lineTo(sx(tx[i]), sy(v));
    });
    ctx.stroke();
  });
}

function field(section, name) {
  return Number(section.querySelector(`[name=${name}]`).value);
}

function wire(id, action) {
  const section = document.getElementById(id);
  const summary = section.querySelector(".summary");
  const canvas = section.querySelector("canvas");
  const go = () => {
    summary.classList.remove("error");
    try {
      summary.textContent = action(section, canvas);
    } catch (e) {
      summary.classList.add("error");
      summary.textContent = String(e);
    }
  };
  section.querySelector("button").addEventListener("click", go);
  go();
}

function cascade(section, canvas) {
  const r = JSON.parse(superradiance_cascade(
    field(section, "l"), field(section, "gamma0"), 1.0, field(section, "t_final"), 400));
  plot(canvas, r.t, [r.current, r.parallel_current], ["#c33", "#36c"]);
  return [
    `J(0)          ${r.j0.toPrecision(8)}   closed form ${r.j0_closed_form.toPrecision(8)}`,
    `bound 1       ${r.bound1.toPrecision(8)}`,
    `bound 2       ${r.bound2.toPrecision(8)}`,
    `emitted       ${r.emitted_energy.toPrecision(8)}`,
  ].join("\n");
}

const exponent = v => v == null ? "n/a" : v.toFixed(4);

function scaling(section, canvas) {
  const scenario = section.querySelector("[name=scenario]").value;
  const r = JSON.parse(scaling_curve(
    scenario, field(section, "l_min"), field(section, "l_max"), field(section, "step")));
  const s = r.samples;
  plot(canvas, s.map(x => x.l),
    [s.map(x => x.current_abs), s.map(x => x.bound1), s.map(x => x.bound2), s.map(x => x.parallel)],
    ["#c33", "#393", "#36c", "#999"], true);
  return [
    `|J| exponent      ${r.fitted_exponent.toFixed(4)}   (r2 ${r.fit_r2.toFixed(6)})`,
    `bound 1 exponent  ${exponent(r.bound1_exponent)}`,
    `bound 2 exponent  ${exponent(r.bound2_exponent)}`,
    `independent       ${exponent(r.parallel_exponent)}`,
  ].join("\n");
}

function battery(section, canvas) {
  const r = JSON.parse(battery_charging(
    field(section, "l"), field(section, "beta_h0"), field(section, "beta_c0"), field(section, "t_final"), 300));
  plot(canvas, r.t, [r.collective, r.parallel], ["#c33", "#36c"]);
  return [
    `steady energy     ${r.steady_energy.toPrecision(8)}`,
    `ergotropy         ${r.ergotropy.toPrecision(8)}`,
    `charging time     ${r.charging_time_collective.toPrecision(6)} collective, ${r.charging_time_parallel.toPrecision(6)} independent`,
    `speed-up          ${r.charging_time_ratio.toPrecision(6)}`,
  ].join("\n");
}

await init();
wire("cascade", cascade);
wire("scaling", scaling);
wire("battery", battery);
