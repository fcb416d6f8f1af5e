// Interactive concept graph: theta slider, SVG rendering, neighbor panel.

import { ApiClient } from "./api.js";
import { runLayout } from "./force.js";
import { clampTheta, filterEdges } from "./state.js";
import { ApiError, ConceptGraph } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export class GraphView {
    private theta = 0.6;
    private svg!: SVGSVGElement;
    private panel!: HTMLElement;
    private slider!: HTMLInputElement;
    private readout!: HTMLElement;

    constructor(
        private api: ApiClient,
        private showError: (message: string) => void,
    ) {}

    mount(root: HTMLElement): void {
        root.innerHTML = `
          <div class="toolbar">
            <label>edge threshold &theta;
              <input type="range" min="0" max="1" step="0.05" value="0.6" aria-label="cosine threshold">
            </label>
            <span class="readout">0.60</span>
            <button type="button" class="refresh">reload</button>
          </div>
          <div class="graph-wrap">
            <svg viewBox="0 0 800 600" role="img" aria-label="concept graph"></svg>
            <aside class="panel" aria-live="polite"><p>Click a concept to see its neighbors.</p></aside>
          </div>`;
        this.svg = root.querySelector("svg") as SVGSVGElement;
        this.panel = root.querySelector(".panel") as HTMLElement;
        this.slider = root.querySelector("input[type=range]") as HTMLInputElement;
        this.readout = root.querySelector(".readout") as HTMLElement;
        this.slider.addEventListener("change", () => {
            this.theta = clampTheta(Number(this.slider.value));
            this.readout.textContent = this.theta.toFixed(2);
            void this.refresh();
        });
        (root.querySelector(".refresh") as HTMLButtonElement).addEventListener("click", () => {
            void this.refresh();
        });
    }

    async refresh(): Promise<void> {
        let graph: ConceptGraph;
        try {
            graph = await this.api.conceptGraph(this.theta);
        } catch (err) {
            // no stale picture: wipe the canvas before surfacing the error
            this.svg.replaceChildren();
            if (err instanceof ApiError && err.status === 409) {
                this.showError("embedding not built");
            } else {
                this.showError(`concept graph unavailable: ${String(err)}`);
            }
            return;
        }
        this.render(graph);
    }

    private render(graph: ConceptGraph): void {
        const edges = filterEdges(graph.edges, this.theta);
        const connected = new Set<string>();
        for (const e of edges) {
            connected.add(e.src);
            connected.add(e.dst);
        }
        const ids = graph.nodes.filter((n) => connected.has(n));
        const nodes = runLayout(ids, edges);
        const pos = new Map(nodes.map((n) => [n.id, n]));

        this.svg.replaceChildren();
        for (const e of edges) {
            const a = pos.get(e.src);
            const b = pos.get(e.dst);
            if (!a || !b) continue;
            const line = document.createElementNS(SVG_NS, "line");
            line.setAttribute("x1", String(a.x));
            line.setAttribute("y1", String(a.y));
            line.setAttribute("x2", String(b.x));
            line.setAttribute("y2", String(b.y));
            line.setAttribute("stroke-width", String(0.5 + 2.5 * e.weight));
            line.classList.add("edge");
            const title = document.createElementNS(SVG_NS, "title");
            title.textContent = `${e.src} — ${e.dst}: ${e.weight.toFixed(3)}`;
            line.appendChild(title);
            this.svg.appendChild(line);
        }
        for (const n of nodes) {
            const group = document.createElementNS(SVG_NS, "g");
            group.classList.add("node");
            group.setAttribute("tabindex", "0");
            group.setAttribute("role", "button");
            group.setAttribute("aria-label", `concept ${n.id}`);
            const circle = document.createElementNS(SVG_NS, "circle");
            circle.setAttribute("cx", String(n.x));
            circle.setAttribute("cy", String(n.y));
            circle.setAttribute("r", "9");
            const label = document.createElementNS(SVG_NS, "text");
            label.setAttribute("x", String(n.x + 12));
            label.setAttribute("y", String(n.y + 4));
            label.textContent = n.id;
            group.appendChild(circle);
            group.appendChild(label);
            const open = () => void this.openNeighbors(n.id);
            group.addEventListener("click", open);
            group.addEventListener("keydown", (ev) => {
                if ((ev as KeyboardEvent).key === "Enter" || (ev as KeyboardEvent).key === " ") {
                    ev.preventDefault();
                    open();
                }
            });
            this.svg.appendChild(group);
        }
        if (!edges.length) {
            const note = document.createElementNS(SVG_NS, "text");
            note.setAttribute("x", "400");
            note.setAttribute("y", "300");
            note.setAttribute("text-anchor", "middle");
            note.textContent = "no edges at this threshold";
            this.svg.appendChild(note);
        }
    }

    private async openNeighbors(concept: string): Promise<void> {
        try {
            const resp = await this.api.neighbors(concept, 0, 12);
            const rows = resp.neighbors
                .map(
                    (n) =>
                        `<tr><td>${n.concept}</td><td class="num">${n.weight.toFixed(3)}</td></tr>`,
                )
                .join("");
            this.panel.innerHTML = `
              <h3>${concept}</h3>
              <table><thead><tr><th>nearest concept</th><th>cosine</th></tr></thead>
              <tbody>${rows || "<tr><td colspan=2>none</td></tr>"}</tbody></table>`;
        } catch (err) {
            this.showError(`neighbors unavailable: ${String(err)}`);
        }
    }
}
