import { SteeringApi } from "./api.js";
import { SteeringController } from "./controller.js";
import { renderScene } from "./render.js";
import { ViewState } from "./state.js";

/** Bootstraps the page: session picker, sliders, legend, and the SVG scene. */
export async function start(root: HTMLElement, baseUrl: string): Promise<void> {
  const api = new SteeringApi(baseUrl);

  root.innerHTML = `
    <div id="banner" style="display:none;color:#fff;background:#c0392b;padding:6px 10px;"></div>
    <div style="display:flex;gap:16px;align-items:flex-start;">
      <div id="scene"></div>
      <div id="panel" style="min-width:260px;font:14px sans-serif;"></div>
    </div>`;
  const banner = root.querySelector<HTMLElement>("#banner")!;
  const scene = root.querySelector<HTMLElement>("#scene")!;
  const panel = root.querySelector<HTMLElement>("#panel")!;

  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get("session");
  if (!sessionId) {
    panel.textContent =
      "Pass ?session=<id> in the URL (create one via POST /sessions).";
    return;
  }

  const state = new ViewState(await api.getSession(sessionId));
  const redraw = () => {
    banner.style.display = state.error ? "block" : "none";
    banner.textContent = state.error ?? "";
    // on error the previous scene is retained; only redraw valid state
    if (!state.error) {
      scene.innerHTML = renderScene(state.contours, state.classes);
    }
    state.classes.forEach((c, i) => {
      const slider = panel.querySelector<HTMLInputElement>(`#w${i}`);
      if (slider) slider.value = String(c.weight);
      const label = panel.querySelector<HTMLElement>(`#wv${i}`);
      if (label) label.textContent = c.weight.toFixed(3);
    });
  };
  const controller = new SteeringController(api, state, redraw);

  panel.innerHTML =
    `<div style="font-weight:bold;margin-bottom:8px;">class weights</div>` +
    state.classes
      .map(
        (c, i) => `
        <div style="margin-bottom:10px;">
          <label style="display:flex;align-items:center;gap:6px;">
            <input type="checkbox" id="v${i}" checked>
            <span style="color:${c.color};font-weight:bold;">${c.name}</span>
            <span id="wv${i}" style="margin-left:auto;">${c.weight.toFixed(3)}</span>
          </label>
          <input type="range" id="w${i}" min="0" max="1" step="0.01"
                 value="${c.weight}" style="width:100%;">
        </div>`,
      )
      .join("");

  state.classes.forEach((_, i) => {
    const slider = panel.querySelector<HTMLInputElement>(`#w${i}`)!;
    slider.addEventListener("input", () => {
      controller.onSliderChange(i, Number(slider.value));
    });
    slider.addEventListener("change", () => controller.flush());
    const toggle = panel.querySelector<HTMLInputElement>(`#v${i}`)!;
    toggle.addEventListener("change", () => controller.onToggleVisible(i));
  });

  redraw();
}
