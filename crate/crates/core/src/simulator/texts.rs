//! Paragraphs used by the default scenario suite.

pub const LIGHTHOUSE: &str = "The lighthouse on the northern point was built in 1871 from granite \
quarried two valleys inland. Every block was hauled to the coast by oxen and lifted into place with a \
wooden crane that the workers rebuilt twice after storms. For most of its working life the tower was \
kept by a single family. The keeper climbed the spiral stairs at dusk to light the lamp, then again at \
midnight to trim the wick and polish the lens. His wife kept the logbook, recording the weather, the \
ships that passed, and the hours the fog bell was rung. Their children learned to read from that \
logbook. In winter the supply boat could not land for weeks at a time, so the family stored flour, \
salted fish and lamp oil in the cellar below the tower. Was it a lonely life? Letters from the \
keeper's daughter suggest it was not. She wrote about seals on the rocks, about the colours of the \
sea before a gale, and about visitors who rowed out on calm summer days to see the lamp. When the \
light was automated in 1962, the family moved to the mainland. The keeper refused to climb another \
staircase for the rest of his life! Today the tower is a small museum. The original lens still turns \
in the lantern room, driven by an electric motor instead of a clockwork weight. Visitors can read the \
logbook in a glass case near the door, and on clear evenings the beam can be seen from the harbour \
twenty kilometres away.";

pub const SOURDOUGH: &str = "A sourdough starter is a living culture of wild yeast and lactic acid \
bacteria. It begins as nothing more than flour and water left in a warm kitchen. Within a few days, \
microbes from the flour, the air and the baker's hands begin to feed on the starches. The mixture \
bubbles, smells sharp, and then settles into a steady rhythm of rising and falling. Why does the \
bread taste sour? The bacteria produce lactic and acetic acids as they digest sugars, and these acids \
give the loaf its tang. The yeast, meanwhile, releases carbon dioxide that is trapped by the gluten \
network and makes the dough rise. A healthy starter needs regular feeding. Most bakers discard part \
of it each day and replace that part with fresh flour and water. Temperature matters a great deal, \
and so does the kind of flour. A \
cool kitchen slows the yeast and favours the acid makers, giving a more sour loaf, while a warm \
kitchen produces a milder bread that rises faster. Some families have kept the same starter alive \
for decades, passing jars of it to children and neighbours. Bakeries in port cities once guarded \
their cultures closely, believing that the local microbes gave their bread its character. Modern \
studies have found that a starter's population is shaped more by the flour and the baker's routine \
than by the city air. Still, no two starters behave quite alike! A loaf made with patience, a long \
ferment and a hot oven has a crisp crust and an open, glossy crumb.";

pub const RIVER_MAPS: &str = "Mapping a river sounds simple until the river refuses to stay in \
one place. Channels shift after every flood, sandbars appear and vanish, and a bend that was marked \
carefully one spring may be a dry meadow by autumn. Early surveyors worked from boats, taking \
soundings with a weighted line and sketching the banks by eye. Their charts were accurate for a \
season at most. Later engineers tried to fix the problem by fixing the river. They built levees, cut \
through meanders, and lined the banks with stone so that the channel would hold still. In many places \
this worked for a while. The river ran straighter and faster, and barges moved goods more cheaply than \
ever before. But the straightened channels carried floods downstream more quickly, and towns below \
them were flooded more often. Wetlands that had once soaked up high water were drained for farms. Fish \
that spawned in quiet side channels lost their nurseries. Can a river be managed without being \
controlled? Some regions are now trying. They remove old embankments, let the water spread across \
protected floodplains, and accept that the map will change from year to year. Surveyors today use \
satellites and drones to redraw the channel after each high water. The new maps are updated in days \
rather than years. Older charts are kept as well, \
because the record of where the water used to run is useful to planners. The latest maps show a river that wanders, braids and rejoins itself, much as it did before \
anyone tried to draw it.";
