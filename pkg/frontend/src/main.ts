// App shell: tabs, error banner, pending-decision guard.

import { ApiClient } from "./api.js";
import { ClustersView } from "./clustersView.js";
import { GraphView } from "./graphView.js";
import { LeadsView } from "./leadsView.js";
import { hasPendingDecisions, initialState, ViewState } from "./state.js";

const api = new ApiClient((window as unknown as { FACETSEG_API?: string }).FACETSEG_API ?? "");

let state: ViewState = initialState();
const stateRef = {
    get: () => state,
    set: (next: ViewState) => {
        state = next;
    },
};

const banner = document.getElementById("banner") as HTMLElement;
let bannerTimer: number | undefined;

function showBanner(message: string, kind: "error" | "info"): void {
    banner.textContent = message;
    banner.className = `banner ${kind}`;
    banner.hidden = false;
    if (bannerTimer) window.clearTimeout(bannerTimer);
    if (kind === "info") {
        bannerTimer = window.setTimeout(() => {
            banner.hidden = true;
        }, 4000);
    }
}

const showError = (m: string) => showBanner(m, "error");
const showInfo = (m: string) => showBanner(m, "info");

const graphView = new GraphView(api, showError);
const clustersView = new ClustersView(api, stateRef, showError, showInfo);
const leadsView = new LeadsView(api, showError);

graphView.mount(document.getElementById("view-graph") as HTMLElement);
clustersView.mount(document.getElementById("view-clusters") as HTMLElement);
leadsView.mount(document.getElementById("view-leads") as HTMLElement);

const tabs = Array.from(document.querySelectorAll<HTMLButtonElement>("nav button[data-view]"));

function activate(view: string): void {
    for (const tab of tabs) {
        const active = tab.dataset.view === view;
        tab.setAttribute("aria-selected", String(active));
        const panel = document.getElementById(`view-${tab.dataset.view}`) as HTMLElement;
        panel.hidden = !active;
    }
    banner.hidden = true;
    if (view === "graph") void graphView.refresh();
    if (view === "clusters") void clustersView.refresh();
}

for (const tab of tabs) {
    tab.addEventListener("click", () => {
        if (hasPendingDecisions(state)) {
            const leave = window.confirm("A cluster decision is still in flight. Leave anyway?");
            if (!leave) return;
        }
        activate(tab.dataset.view as string);
    });
}

window.addEventListener("beforeunload", (ev) => {
    if (hasPendingDecisions(state)) {
        ev.preventDefault();
    }
});

activate("graph");
