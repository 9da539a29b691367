"""Walkthrough: conditional attribute statistics and fusion features.

How often does a given URL domain or username co-occur with real vs
fake items in training data?  Those per-value ratios become extra
features next to the model probabilities.  Run with:

    python3 demos/02_attribute_statistics.py
"""

from fusionet.corpus import Dataset, LabeledItem
from fusionet.datasets import load_reference_stats
from fusionet.stat_features import fit_stats, lookup

# a toy training corpus: trustworthy.org appears mostly in real items
items = []
for k in range(8):
    items.append(LabeledItem(id=f"r{k}", text="t",
                             attributes={"domain": ("trustworthy.org",)}, label="real"))
for k in range(2):
    items.append(LabeledItem(id=f"f{k}", text="t",
                             attributes={"domain": ("trustworthy.org",)}, label="fake"))
for k in range(6):
    items.append(LabeledItem(id=f"s{k}", text="t",
                             attributes={"domain": ("clickbait.example",)}, label="fake"))

table = fit_stats(Dataset(items=tuple(items)), ["domain"])
for (kind, value), (n_real, n_fake) in sorted(table.counts.items()):
    pair = table.prob(kind, value)
    print(f"{value:22s} n_real={n_real:2d} n_fake={n_fake:2d} "
          f"p_real={pair.p_real:.3f} p_fake={pair.p_fake:.3f}")

# an item carrying several known values gets the mean of their pairs;
# unseen values fall back to the neutral (0.5, 0.5) with present=False
pair, present = lookup(table, "domain", ["trustworthy.org", "clickbait.example"])
print(f"\ntwo known values averaged  -> ({pair.p_real:.3f}, {pair.p_fake:.3f}), present={present}")
pair, present = lookup(table, "domain", ["never-seen.net"])
print(f"unseen value               -> ({pair.p_real:.3f}, {pair.p_fake:.3f}), present={present}")

# bundled reference tables from the two public benchmarks ship as fixtures
covid = load_reference_stats("covid")
print("\nreference table sample (COVID-19 tweets benchmark):")
for key in (("domain", "news.sky"), ("username", "MoHFW_NDIA")):
    pair = covid.prob(*key)
    print(f"  {key[1]:12s} p_real={pair.p_real:.4f} p_fake={pair.p_fake:.4f} "
          f"counts={covid.counts[key]}")
