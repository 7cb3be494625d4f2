/** Browser bootstrap: wires the panels to the DOM against a live service. */

import { ServiceClient } from "./api.js";
import { parseArrows } from "./diagram.js";
import {
  MergeSelection,
  diagramPanel,
  historyPanel,
  jobPanel,
  labelsOf,
  mergeBody,
  mergeJustified,
  mergePanel,
  problemPanel,
} from "./panels.js";
import { SessionView } from "./state.js";

const DEFAULT_PROBLEM = `delta: 3
white:
M O^2
P^3
black:
M [OP]^2
O^3
`;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function boot() {
  const base = (document.body.dataset["service"] ?? "http://127.0.0.1:8343").trim();
  const view = new SessionView(new ServiceClient(base));
  let side: "white" | "black" = "black";
  const selection: MergeSelection = { sources: [], target: null, side: "white" };
  let pollTimer: number | undefined;

  const render = async () => {
    if (!view.state) return;
    el("problem").innerHTML = problemPanel(view.state);
    const arrows = parseArrows(await view.diagram(side));
    el("diagram").innerHTML = diagramPanel(labelsOf(view.problemText), arrows, side);
    // merging on one side is justified by the opposite constraint's strengths,
    // so the displayed diagram is exactly the evidence for merges on the
    // other side
    selection.side = side === "white" ? "black" : "white";
    el("merge").innerHTML = mergePanel(selection, arrows);
    el("history").innerHTML = historyPanel(view.tree);
    el("job").innerHTML = jobPanel(view.job);
    const verdict = await view.zeroRound();
    el("zeroround").textContent =
      `zero-round: white ${verdict["white-solvable"]}, black ${verdict["black-solvable"]}`;
    wire(arrows);
  };

  const wire = (arrows: ReturnType<typeof parseArrows>) => {
    document.querySelectorAll<SVGGElement>(".label-node").forEach((node) => {
      node.addEventListener("click", () => {
        const label = node.dataset["label"]!;
        if (!selection.sources.includes(label) && selection.target !== label) {
          if (selection.sources.length && !selection.target) selection.target = label;
          else selection.sources = [...selection.sources, label];
        } else {
          selection.sources = selection.sources.filter((s) => s !== label);
          if (selection.target === label) selection.target = null;
        }
        el("merge").innerHTML = mergePanel(selection, arrows);
        wire(arrows);
      });
    });
    document.querySelector<HTMLButtonElement>(".submit-merge")?.addEventListener(
      "click",
      async () => {
        if (!mergeJustified(selection, arrows)) return;
        await view.apply("merge", { side: selection.side }, mergeBody(selection));
        selection.sources = [];
        selection.target = null;
        await render();
      },
    );
    document.querySelector<HTMLButtonElement>(".start-autobound")?.addEventListener(
      "click",
      async () => {
        await view.startAutobound(5, 8);
        pollTimer = window.setInterval(async () => {
          const job = await view.pollJob();
          el("job").innerHTML = jobPanel(job);
          if (job && job.status !== "running") window.clearInterval(pollTimer);
        }, 500);
        await render();
      },
    );
    document.querySelector<HTMLButtonElement>(".cancel-job")?.addEventListener(
      "click",
      () => void view.cancelJob(),
    );
  };

  el<HTMLButtonElement>("load").addEventListener("click", async () => {
    await view.load(el<HTMLTextAreaElement>("input").value);
    await render();
  });
  el<HTMLButtonElement>("step-black").addEventListener("click", async () => {
    await view.apply("re_black");
    await render();
  });
  el<HTMLButtonElement>("step-white").addEventListener("click", async () => {
    await view.apply("re_white");
    await render();
  });
  el<HTMLButtonElement>("undo").addEventListener("click", async () => {
    await view.undo();
    await render();
  });
  el<HTMLButtonElement>("redo").addEventListener("click", async () => {
    await view.redo();
    await render();
  });
  el<HTMLButtonElement>("flip-side").addEventListener("click", async () => {
    side = side === "white" ? "black" : "white";
    await render();
  });

  el<HTMLTextAreaElement>("input").value = DEFAULT_PROBLEM;
}

if (typeof document !== "undefined") {
  window.addEventListener("DOMContentLoaded", () => void boot());
}
