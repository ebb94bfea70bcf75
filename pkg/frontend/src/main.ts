import { CampaignApi } from "./api";
import { CampaignDashboard } from "./dashboard";
import { Poller } from "./polling";
import { CampaignWizard } from "./wizard";

export function mount(root: HTMLElement, api = new CampaignApi()): void {
  const poller = new Poller();
  let dashboard: CampaignDashboard | null = null;

  const wizard = new CampaignWizard(api, {
    onCreated: (id) => {
      if (dashboard) {
        poller.stop();
        dashboard.root.remove();
      }
      dashboard = new CampaignDashboard(api, id);
      root.append(dashboard.root);
      void dashboard.refresh();
      poller.start(() => dashboard!.refresh());
    },
  });
  root.append(wizard.root);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mount(document.getElementById("app")!);
}
