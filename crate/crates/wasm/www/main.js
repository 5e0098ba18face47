import init, { lattice_paths, spectrum_curve, return_map_orbit } from "./pkg/echkit_wasm.js";

const $ = (id) => document.getElementById(id);

function call(fn, out, ...args) {
  const v = JSON.parse(fn(...args));
  if (v.error) {
    out.textContent = v.error;
    out.className = "out err";
    return null;
  }
  out.className = "out";
  return v;
}

// maps data bounds onto a canvas with a margin
function frame(canvas, xmin, xmax, ymin, ymax, pad = 24) {
  const sx = (canvas.width - 2 * pad) / (xmax - xmin || 1);
  const sy = (canvas.height - 2 * pad) / (ymax - ymin || 1);
  return {
    x: (x) => pad + (x - xmin) * sx,
    y: (y) => canvas.height - pad - (y - ymin) * sy,
  };
}

function polyline(ctx, f, pts, color, width = 2) {
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  pts.forEach(([x, y], i) => (i ? ctx.lineTo(f.x(x), f.y(y)) : ctx.moveTo(f.x(x), f.y(y))));
  ctx.stroke();
}

function drawPaths() {
  const v = call(lattice_paths, $("lp-out"), $("lp-theta").value, Number($("lp-m").value));
  const canvas = $("lp-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!v) return;
  $("lp-out").textContent = `p+ = (${v.pplus.join(", ")})    p- = (${v.pminus.join(", ")})`;
  const ys = v.upper.concat(v.lower).map((p) => p[1]);
  const ymin = Math.min(0, ...ys), ymax = Math.max(0, ...ys, v.theta * v.m);
  const f = frame(canvas, 0, v.m, ymin - 0.5, ymax + 0.5);
  ctx.fillStyle = "#ccc";
  for (let x = 0; x <= v.m; x++) {
    for (let y = Math.floor(ymin - 0.5); y <= Math.ceil(ymax + 0.5); y++) {
      ctx.fillRect(f.x(x) - 1, f.y(y) - 1, 2, 2);
    }
  }
  polyline(ctx, f, [[0, 0], [v.m, v.theta * v.m]], "#888", 1);
  polyline(ctx, f, v.upper, "#c0392b");
  polyline(ctx, f, v.lower, "#2471a3");
}

function drawSpectrum() {
  const v = call(spectrum_curve, $("sp-out"), $("sp-a").value, $("sp-b").value, Number($("sp-k").value));
  const canvas = $("sp-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!v) return;
  const head = v.first.slice(0, 8).map((e) => `(${e.m},${e.n}) ${e.action}`).join("  ");
  $("sp-out").textContent = `volume ${v.volume.toFixed(6)}   ${head}`;
  const ks = v.ratios.map((p) => p[0]);
  const rs = v.ratios.map((p) => p[1]).concat([v.volume]);
  const f = frame(canvas, 0, Math.max(...ks), Math.min(...rs), Math.max(...rs));
  polyline(ctx, f, [[0, v.volume], [Math.max(...ks), v.volume]], "#888", 1);
  polyline(ctx, f, v.ratios, "#1e8449", 1.5);
}

let rmRadius = 1;

function drawOrbit(x, y) {
  const out = $("rm-out");
  const canvas = $("rm-canvas");
  const ctx = canvas.getContext("2d");
  const v = call(return_map_orbit, out, $("rm-a").value, $("rm-b").value, x, y, Number($("rm-steps").value));
  if (!v) return;
  if (v.radius !== rmRadius) {
    rmRadius = v.radius;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
  }
  const f = frame(canvas, -rmRadius, rmRadius, -rmRadius, rmRadius, 10);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.arc(f.x(0), f.y(0), f.x(rmRadius) - f.x(0), 0, 2 * Math.PI);
  ctx.stroke();
  ctx.fillStyle = `hsl(${Math.round(360 * Math.random())}, 60%, 40%)`;
  for (const [px, py] of v.orbit) ctx.fillRect(f.x(px) - 1, f.y(py) - 1, 2, 2);
  out.textContent = `${v.orbit.length} points from (${x.toFixed(3)}, ${y.toFixed(3)}), page radius ${rmRadius.toFixed(4)}`;
}

await init();
$("lp-go").onclick = drawPaths;
$("sp-go").onclick = drawSpectrum;
$("rm-canvas").onclick = (ev) => {
  const c = ev.target;
  const r = c.getBoundingClientRect();
  const f = (t, n) => ((t / n) * 2 - 1) * rmRadius * (n / (n - 20));
  drawOrbit(f(ev.clientX - r.left, c.width), -f(ev.clientY - r.top, c.height));
};
drawPaths();
drawSpectrum();
drawOrbit(0, 0);
drawOrbit(0.5 * rmRadius, 0.1 * rmRadius);
